#include "mpk/model_json.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "mpk/errors.hpp"

namespace mpk {

namespace {

using nlohmann::json;

void require_keys(const json& j, std::set<std::string> allowed) {
    allowed.insert("type");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw_validation("InvalidParameter", "unknown key '" + it.key() + "' in model config");
}

double num(const json& j, const char* k) {
    if (!j.contains(k) || !j[k].is_number())
        throw_validation("InvalidParameter", std::string("missing numeric field '") + k + "'");
    return j[k].get<double>();
}

Eigen::VectorXd vec(const json& j, const char* k, int expect = -1) {
    if (!j.contains(k) || !j[k].is_array())
        throw_validation("InvalidParameter", std::string("missing array field '") + k + "'");
    const auto& a = j[k];
    Eigen::VectorXd v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v(i) = a[i].get<double>();
    if (expect >= 0 && v.size() != expect)
        throw_validation("InvalidParameter", std::string("field '") + k + "' has wrong length");
    return v;
}

Eigen::MatrixXd mat(const json& j, const char* k, int expect = -1) {
    if (!j.contains(k) || !j[k].is_array())
        throw_validation("InvalidParameter", std::string("missing matrix field '") + k + "'");
    const auto& a = j[k];
    int rows = static_cast<int>(a.size());
    int cols = rows > 0 ? static_cast<int>(a[0].size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(a[i].size()) != cols)
            throw_validation("InvalidParameter", std::string("ragged matrix in '") + k + "'");
        for (int c = 0; c < cols; ++c) m(i, c) = a[i][c].get<double>();
    }
    if (expect >= 0 && (rows != expect || cols != expect))
        throw_validation("InvalidParameter", std::string("matrix '") + k + "' has wrong shape");
    return m;
}

std::vector<double> poly(const json& j, const char* k) {
    Eigen::VectorXd v = vec(j, k);
    return {v.data(), v.data() + v.size()};
}

json to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}
json to_json(const Eigen::MatrixXd& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
        a.push_back(row);
    }
    return a;
}

}  // namespace

ModelSpec model_from_json(const json& j) {
    if (!j.is_object() || !j.contains("type"))
        throw_validation("InvalidParameter", "model config must be an object with a 'type'");
    const std::string type = j["type"].get<std::string>();

    if (type == "cir") {
        require_keys(j, {"a", "kappa", "sigma"});
        return make_cir(num(j, "a"), num(j, "kappa"), num(j, "sigma"));
    }
    if (type == "sqrt_absorbing") {
        require_keys(j, {"b", "sigma"});
        return make_sqrt_absorbing(num(j, "b"), num(j, "sigma"));
    }
    if (type == "vasicek") {
        require_keys(j, {"kappa", "theta", "sigma"});
        return make_vasicek(num(j, "kappa"), num(j, "theta"), num(j, "sigma"));
    }
    if (type == "three_halves") {
        require_keys(j, {"kappa", "theta", "sigma"});
        return make_three_halves(num(j, "kappa"), num(j, "theta"), num(j, "sigma"));
    }
    if (type == "merton_quadratic") {
        require_keys(j, {"kappa", "theta", "sigma"});
        return make_merton_quadratic(num(j, "kappa"), num(j, "theta"), num(j, "sigma"));
    }
    if (type == "brownian_rate") {
        require_keys(j, {"a", "sigma"});
        return make_brownian_rate(num(j, "a"), num(j, "sigma"));
    }
    if (type == "reflected_interval") {
        require_keys(j, {"l", "r", "mu", "sigma", "rate"});
        return make_reflected_interval(num(j, "l"), num(j, "r"), poly(j, "mu"), poly(j, "sigma"),
                                       poly(j, "rate"));
    }
    if (type == "jcir") {
        require_keys(j, {"a", "kappa", "sigma", "varpi", "mu"});
        JcirSpec s;
        s.a = num(j, "a");
        s.kappa = num(j, "kappa");
        s.sigma = num(j, "sigma");
        s.varpi = num(j, "varpi");
        s.mu = num(j, "mu");
        return s;
    }
    if (type == "affine") {
        require_keys(j, {"m", "n", "b", "B", "a", "alpha", "gamma", "delta"});
        AffineSpec s;
        s.m = j["m"].get<int>();
        s.n = j["n"].get<int>();
        const int d = s.m + s.n;
        s.b = vec(j, "b", d);
        s.B = mat(j, "B", d);
        s.a = mat(j, "a", d);
        s.gamma = num(j, "gamma");
        s.delta = vec(j, "delta", d);
        if (!j.contains("alpha") || static_cast<int>(j["alpha"].size()) != s.m)
            throw_validation("InvalidParameter", "'alpha' must hold m matrices");
        for (int i = 0; i < s.m; ++i) {
            json wrap;
            wrap["alpha_i"] = j["alpha"][i];
            s.alpha.push_back(mat(wrap, "alpha_i", d));
        }
        return s;
    }
    if (type == "qtsm") {
        require_keys(j, {"b", "B", "rho", "gamma", "delta", "Phi"});
        QtsmSpec s;
        s.b = vec(j, "b");
        const int d = static_cast<int>(s.b.size());
        s.B = mat(j, "B", d);
        s.rho = mat(j, "rho", d);
        s.gamma = num(j, "gamma");
        s.delta = vec(j, "delta", d);
        s.Phi = mat(j, "Phi", d);
        return s;
    }
    throw_validation("InvalidParameter", "unknown model type '" + type + "'");
}

ModelSpec model_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_validation("InvalidParameter", "cannot open model file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw_validation("InvalidParameter", std::string("model JSON parse error: ") + e.what());
    }
    return model_from_json(j);
}

json model_to_json(const ModelSpec& spec) {
    json j;
    if (auto* d = std::get_if<Diffusion1D>(&spec)) {
        j["type"] = d->name;
        for (const auto& [k, v] : d->params) j[k] = v;
        if (d->name == "reflected_interval" || d->name == "custom") {
            j["l"] = d->domain.l;
            j["r"] = d->domain.r;
        }
        return j;
    }
    if (auto* s = std::get_if<AffineSpec>(&spec)) {
        j["type"] = "affine";
        j["m"] = s->m;
        j["n"] = s->n;
        j["b"] = to_json(s->b);
        j["B"] = to_json(s->B);
        j["a"] = to_json(s->a);
        json al = json::array();
        for (const auto& m : s->alpha) al.push_back(to_json(m));
        j["alpha"] = al;
        j["gamma"] = s->gamma;
        j["delta"] = to_json(s->delta);
        return j;
    }
    if (auto* s = std::get_if<QtsmSpec>(&spec)) {
        j["type"] = "qtsm";
        j["b"] = to_json(s->b);
        j["B"] = to_json(s->B);
        j["rho"] = to_json(s->rho);
        j["gamma"] = s->gamma;
        j["delta"] = to_json(s->delta);
        j["Phi"] = to_json(s->Phi);
        return j;
    }
    const auto& s = std::get<JcirSpec>(spec);
    j["type"] = "jcir";
    j["a"] = s.a;
    j["kappa"] = s.kappa;
    j["sigma"] = s.sigma;
    j["varpi"] = s.varpi;
    j["mu"] = s.mu;
    return j;
}

}  // namespace mpk
