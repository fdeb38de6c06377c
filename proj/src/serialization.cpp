#include "koopman/serialization.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "koopman/errors.hpp"

namespace koopman {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

namespace json_io {

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string child(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

const json& field(const json& j, const std::string& path, const char* key) {
    if (!j.is_object()) throw JsonSchemaError("expected an object", path);
    const auto it = j.find(key);
    if (it == j.end()) throw JsonSchemaError(std::string("missing key '") + key + "'", path);
    return *it;
}

const json* optional_field(const json& j, const std::string& path, const char* key) {
    if (!j.is_object()) throw JsonSchemaError("expected an object", path);
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return nullptr;
    return &*it;
}

double read_number(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw JsonSchemaError("expected a number", path);
}

double read_finite(const json& j, const std::string& path) {
    const double v = read_number(j, path);
    if (!std::isfinite(v)) throw JsonSchemaError("expected a finite number", path);
    return v;
}

std::size_t read_index(const json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<long long>() < 0)
        throw JsonSchemaError("expected a non-negative integer", path);
    return j.get<std::size_t>();
}

const json& read_array(const json& j, const std::string& path) {
    if (!j.is_array()) throw JsonSchemaError("expected an array", path);
    return j;
}

Eigen::VectorXd read_vector(const json& j, const std::string& path) {
    read_array(j, path);
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = read_finite(j[i], child(path, i));
    return v;
}

// Row-major nested arrays; an empty array reads as a 0x0 matrix.
Eigen::MatrixXd read_matrix(const json& j, const std::string& path) {
    read_array(j, path);
    if (j.empty()) return {};
    const std::size_t cols = read_array(j[0], child(path, 0)).size();
    Eigen::MatrixXd M(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        const auto rp = child(path, r);
        if (read_array(j[r], rp).size() != cols) throw JsonSchemaError("ragged matrix row", rp);
        for (std::size_t c = 0; c < cols; ++c)
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = read_finite(j[r][c], child(rp, c));
    }
    return M;
}

std::complex<double> read_complex(const json& j, const std::string& path) {
    return {read_finite(field(j, path, "re"), child(path, "re")), read_finite(field(j, path, "im"), child(path, "im"))};
}

Eigen::MatrixXcd read_complex_matrix(const json& j, const std::string& path) {
    read_array(j, path);
    if (j.empty()) return {};
    const std::size_t cols = read_array(j[0], child(path, 0)).size();
    Eigen::MatrixXcd M(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        const auto rp = child(path, r);
        if (read_array(j[r], rp).size() != cols) throw JsonSchemaError("ragged matrix row", rp);
        for (std::size_t c = 0; c < cols; ++c)
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = read_complex(j[r][c], child(rp, c));
    }
    return M;
}

}  // namespace json_io

namespace {

using namespace json_io;

json vector_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json matrix_json(const Eigen::MatrixXd& M) {
    json out = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) out.push_back(vector_json(M.row(r).transpose()));
    return out;
}

json complex_json(std::complex<double> z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

json complex_matrix_json(const Eigen::MatrixXcd& M) {
    json out = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(complex_json(M(r, c)));
        out.push_back(std::move(row));
    }
    return out;
}

json basis_json(const BasisFunction& f) {
    json out{{"kind", kind_name(f)}};
    std::visit(Overloaded{
                   [](const basis::Constant&) {},
                   [&](const basis::Coordinate& c) { out["index"] = c.index; },
                   [&](const basis::Monomial& m) { out["exponents"] = m.exponents; },
                   [&](const basis::GaussianRbf& g) {
                       out["center"] = vector_json(g.center);
                       out["bandwidth"] = g.bandwidth;
                   },
                   [&](const basis::ThinPlateSpline& t) { out["center"] = vector_json(t.center); },
                   [&](const basis::AffineOutput& a) { out["row"] = vector_json(a.row); },
               },
               f);
    return out;
}

BasisFunction basis_from_json(const json& j, const std::string& path) {
    const json& kind_j = field(j, path, "kind");
    if (!kind_j.is_string()) throw JsonSchemaError("expected a string", child(path, "kind"));
    const auto& kind = kind_j.get_ref<const std::string&>();
    if (kind == "constant") return basis::Constant{};
    if (kind == "coordinate") return basis::Coordinate{read_index(field(j, path, "index"), child(path, "index"))};
    if (kind == "monomial") {
        const auto ep = child(path, "exponents");
        const json& e = read_array(field(j, path, "exponents"), ep);
        basis::Monomial m;
        for (std::size_t i = 0; i < e.size(); ++i) m.exponents.push_back(static_cast<unsigned>(read_index(e[i], child(ep, i))));
        return m;
    }
    if (kind == "gaussian-rbf")
        return basis::GaussianRbf{read_vector(field(j, path, "center"), child(path, "center")),
                                  read_finite(field(j, path, "bandwidth"), child(path, "bandwidth"))};
    if (kind == "thin-plate-spline")
        return basis::ThinPlateSpline{read_vector(field(j, path, "center"), child(path, "center"))};
    if (kind == "affine-output") return basis::AffineOutput{read_vector(field(j, path, "row"), child(path, "row"))};
    throw JsonSchemaError("unknown basis kind '" + kind + "'", child(path, "kind"));
}

json meta_json(const ModelMeta& meta) {
    json out{{"samples", meta.samples},
             {"gram_condition", number_to_json(meta.gram_condition)},
             {"system_condition", number_to_json(meta.system_condition)},
             {"eig_condition", number_to_json(meta.eig_condition)},
             {"warnings", meta.warnings}};
    out["regularizer"] = meta.regularizer ? to_json(*meta.regularizer) : json(nullptr);
    out["operator_regularizer"] = meta.operator_regularizer ? to_json(*meta.operator_regularizer) : json(nullptr);
    return out;
}

ModelMeta meta_from_json(const json& j, const std::string& path) {
    ModelMeta meta;
    if (!j.is_object()) throw JsonSchemaError("expected an object", path);
    if (const json* v = optional_field(j, path, "samples")) meta.samples = read_index(*v, child(path, "samples"));
    if (const json* v = optional_field(j, path, "gram_condition"))
        meta.gram_condition = read_number(*v, child(path, "gram_condition"));
    if (const json* v = optional_field(j, path, "system_condition"))
        meta.system_condition = read_number(*v, child(path, "system_condition"));
    if (const json* v = optional_field(j, path, "eig_condition"))
        meta.eig_condition = read_number(*v, child(path, "eig_condition"));
    if (const json* v = optional_field(j, path, "regularizer"))
        meta.regularizer = regularizer_from_json(*v, child(path, "regularizer"));
    if (const json* v = optional_field(j, path, "operator_regularizer"))
        meta.operator_regularizer = regularizer_from_json(*v, child(path, "operator_regularizer"));
    if (const json* v = optional_field(j, path, "warnings")) {
        const auto wp = child(path, "warnings");
        read_array(*v, wp);
        for (std::size_t i = 0; i < v->size(); ++i) {
            if (!(*v)[i].is_string()) throw JsonSchemaError("expected a string", child(wp, i));
            meta.warnings.push_back((*v)[i].get<std::string>());
        }
    }
    return meta;
}

}  // namespace

using namespace json_io;

json number_to_json(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

json to_json(const Dictionary& dict) {
    json basis = json::array();
    for (const auto& f : dict.basis()) basis.push_back(basis_json(f));
    return json{{"state_dim", dict.state_dim()}, {"basis", std::move(basis)}};
}

Dictionary dictionary_from_json(const json& j, const std::string& path) {
    const std::size_t n = read_index(field(j, path, "state_dim"), child(path, "state_dim"));
    const auto bp = child(path, "basis");
    const json& arr = read_array(field(j, path, "basis"), bp);
    std::vector<BasisFunction> basis;
    for (std::size_t i = 0; i < arr.size(); ++i) basis.push_back(basis_from_json(arr[i], child(bp, i)));
    try {
        return Dictionary(n, std::move(basis));
    } catch (const ConfigurationError& e) {
        throw JsonSchemaError(e.what(), path);
    }
}

json to_json(const RegularizerSpec& reg) {
    return std::visit(Overloaded{
                          [](const regularizer::Pseudoinverse& p) {
                              return json{{"mode", "pseudoinverse"}, {"svd_rtol", p.svd_rtol}};
                          },
                          [](const regularizer::Ridge& r) { return json{{"mode", "ridge"}, {"beta", r.beta}}; },
                          [](const regularizer::Tikhonov& t) {
                              json out{{"mode", "tikhonov"}};
                              if (const auto* s = std::get_if<regularizer::ScaledIdentity>(&t.Q)) {
                                  out["Q"] = json{{"scalar", s->beta}};
                              } else {
                                  out["Q"] = matrix_json(std::get<Eigen::MatrixXd>(t.Q));
                              }
                              out["W0"] = matrix_json(t.W0);
                              out["prior_columns"] = t.prior_columns;
                              return out;
                          },
                      },
                      reg);
}

RegularizerSpec regularizer_from_json(const json& j, const std::string& path) {
    const json& mode_j = field(j, path, "mode");
    if (!mode_j.is_string()) throw JsonSchemaError("expected a string", child(path, "mode"));
    const auto& mode = mode_j.get_ref<const std::string&>();
    RegularizerSpec reg;
    if (mode == "pseudoinverse") {
        regularizer::Pseudoinverse p;
        if (const json* v = optional_field(j, path, "svd_rtol")) p.svd_rtol = read_finite(*v, child(path, "svd_rtol"));
        reg = p;
    } else if (mode == "ridge") {
        reg = regularizer::Ridge{read_finite(field(j, path, "beta"), child(path, "beta"))};
    } else if (mode == "tikhonov") {
        regularizer::Tikhonov t;
        const auto qp = child(path, "Q");
        const json& q = field(j, path, "Q");
        if (q.is_object()) {
            t.Q = regularizer::ScaledIdentity{read_finite(field(q, qp, "scalar"), child(qp, "scalar"))};
        } else {
            t.Q = read_matrix(q, qp);
        }
        if (const json* v = optional_field(j, path, "W0")) t.W0 = read_matrix(*v, child(path, "W0"));
        if (const json* v = optional_field(j, path, "prior_columns")) {
            const auto pp = child(path, "prior_columns");
            read_array(*v, pp);
            for (std::size_t i = 0; i < v->size(); ++i) t.prior_columns.push_back(read_index((*v)[i], child(pp, i)));
        }
        reg = std::move(t);
    } else {
        throw JsonSchemaError("unknown regularizer mode '" + mode + "'", child(path, "mode"));
    }
    try {
        validate(reg);
    } catch (const ConfigurationError& e) {
        throw JsonSchemaError(e.what(), path);
    }
    return reg;
}

DictionarySpec dictionary_spec_from_json(const json& j, const std::string& path) {
    DictionarySpec spec;
    spec.state_dim = read_index(field(j, path, "state_dim"), child(path, "state_dim"));
    if (const json* v = optional_field(j, path, "monomial_degree"))
        spec.monomial_degree = static_cast<unsigned>(read_index(*v, child(path, "monomial_degree")));
    if (const json* v = optional_field(j, path, "include_state")) {
        if (!v->is_boolean()) throw JsonSchemaError("expected a boolean", child(path, "include_state"));
        spec.include_state = v->get<bool>();
    }
    if (const json* v = optional_field(j, path, "rbf_bandwidth"))
        spec.rbf_bandwidth = read_finite(*v, child(path, "rbf_bandwidth"));
    auto rows = [&](const char* key, std::vector<Eigen::VectorXd>& out) {
        if (const json* v = optional_field(j, path, key)) {
            const auto kp = child(path, key);
            read_array(*v, kp);
            for (std::size_t i = 0; i < v->size(); ++i) out.push_back(read_vector((*v)[i], child(kp, i)));
        }
    };
    rows("rbf_centers", spec.rbf_centers);
    rows("output_guess_rows", spec.output_guess_rows);
    return spec;
}

json to_json(const KoopmanModel& model) {
    json eig = json::array();
    for (Eigen::Index i = 0; i < model.eigenvalues().size(); ++i) eig.push_back(complex_json(model.eigenvalues()[i]));
    return json{{"dictionary", to_json(model.dictionary())},
                {"K", matrix_json(model.K())},
                {"eigenvalues", std::move(eig)},
                {"V", complex_matrix_json(model.V())},
                {"W", matrix_json(model.W())},
                {"modes", complex_matrix_json(model.modes())},
                {"meta", meta_json(model.meta())}};
}

KoopmanModel model_from_json(const json& j, const std::string& path) {
    Dictionary dict = dictionary_from_json(field(j, path, "dictionary"), child(path, "dictionary"));
    Eigen::MatrixXd K = read_matrix(field(j, path, "K"), child(path, "K"));
    const auto ep = child(path, "eigenvalues");
    const json& eig_j = read_array(field(j, path, "eigenvalues"), ep);
    Eigen::VectorXcd eig(static_cast<Eigen::Index>(eig_j.size()));
    for (std::size_t i = 0; i < eig_j.size(); ++i) eig[static_cast<Eigen::Index>(i)] = read_complex(eig_j[i], child(ep, i));
    Eigen::MatrixXcd V = read_complex_matrix(field(j, path, "V"), child(path, "V"));
    Eigen::MatrixXd W = read_matrix(field(j, path, "W"), child(path, "W"));
    Eigen::MatrixXcd modes;
    if (const json* v = optional_field(j, path, "modes")) modes = read_complex_matrix(*v, child(path, "modes"));
    ModelMeta meta;
    if (const json* v = optional_field(j, path, "meta")) meta = meta_from_json(*v, child(path, "meta"));
    try {
        return KoopmanModel(std::move(dict), std::move(K), std::move(eig), std::move(V), std::move(W), std::move(modes),
                            std::move(meta));
    } catch (const InputShapeError& e) {
        throw JsonSchemaError(e.what(), path);
    }
}

void save_model(const KoopmanModel& model, const std::string& file) {
    std::ofstream out(file);
    if (!out) throw Error("cannot write '" + file + "'");
    out << to_json(model).dump(1) << "\n";
    if (!out) throw Error("failed writing '" + file + "'");
}

KoopmanModel load_model(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw JsonSchemaError("cannot open model file '" + file + "'", "");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw JsonSchemaError(std::string("invalid JSON: ") + e.what(), "");
    }
    return model_from_json(j);
}

json to_json(const DiagnosticsReport& report) {
    auto per_output = [](const std::optional<Eigen::VectorXd>& v) -> json {
        if (!v) return "unavailable";
        json out = json::array();
        for (Eigen::Index i = 0; i < v->size(); ++i) out.push_back(number_to_json((*v)[i]));
        return out;
    };
    return json{{"span_defect", per_output(report.span_defect)},
                {"invariance_defect", number_to_json(report.invariance_defect)},
                {"claim1_gap", per_output(report.claim1_gap)},
                {"claim2_gap", per_output(report.claim2_gap)},
                {"projection_margin", per_output(report.projection_margin)},
                {"gram_condition", number_to_json(report.gram_condition)},
                {"eig_condition", number_to_json(report.eig_condition)},
                {"warnings", report.warnings}};
}

}  // namespace koopman
