#pragma once

#include <string>

#include <json.hpp>

#include "koopman/diagnostics.hpp"
#include "koopman/dictionary.hpp"
#include "koopman/solver.hpp"
#include "koopman/spectral.hpp"

namespace koopman {

using json = nlohmann::json;

// All from_json readers throw JsonSchemaError carrying the JSON pointer of the
// first offending value; `path` is the pointer of the value passed in.

json to_json(const Dictionary& dict);
Dictionary dictionary_from_json(const json& j, const std::string& path = "");

// {"mode": "pseudoinverse"|"ridge"|"tikhonov", "svd_rtol", "beta", "Q", "W0", "prior_columns"}.
// Q is either a full matrix or {"scalar": beta}.
json to_json(const RegularizerSpec& reg);
RegularizerSpec regularizer_from_json(const json& j, const std::string& path = "");

// {"state_dim", "monomial_degree", "include_state", "rbf_centers", "rbf_bandwidth", "output_guess_rows"}
DictionarySpec dictionary_spec_from_json(const json& j, const std::string& path = "");

json to_json(const KoopmanModel& model);
KoopmanModel model_from_json(const json& j, const std::string& path = "");

void save_model(const KoopmanModel& model, const std::string& file);
KoopmanModel load_model(const std::string& file);

json to_json(const DiagnosticsReport& report);

// Path-tracked readers shared by the model and config parsers.
namespace json_io {

std::string child(const std::string& path, const std::string& key);
std::string child(const std::string& path, std::size_t index);
const json& field(const json& j, const std::string& path, const char* key);
// Null when the key is absent or null.
const json* optional_field(const json& j, const std::string& path, const char* key);
// Accepts numbers and the strings "inf", "-inf", "nan".
double read_number(const json& j, const std::string& path);
double read_finite(const json& j, const std::string& path);
std::size_t read_index(const json& j, const std::string& path);
const json& read_array(const json& j, const std::string& path);
Eigen::VectorXd read_vector(const json& j, const std::string& path);
Eigen::MatrixXd read_matrix(const json& j, const std::string& path);
std::complex<double> read_complex(const json& j, const std::string& path);
Eigen::MatrixXcd read_complex_matrix(const json& j, const std::string& path);

}  // namespace json_io

// Numbers as JSON numbers; non-finite values as the strings "inf", "-inf", "nan".
json number_to_json(double v);

}  // namespace koopman
