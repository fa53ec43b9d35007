#pragma once

#include <nlohmann/json.hpp>

#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include "subdyn/irs.hpp"
#include "subdyn/pingpong.hpp"
#include "subdyn/recurrence.hpp"
#include "subdyn/stallings.hpp"

namespace cli {

using json = nlohmann::json;

// Malformed input; the message names the file and the offending field.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FieldOverrides {
  double tolerance = 0;  // > 0 replaces the real zero tolerance
  int precision = 0;     // > 0 replaces the p-adic digit count
};

json load_json(const std::string& path);

// Rejects keys outside `allowed` and missing `required` keys.
void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed,
                std::initializer_list<const char*> required = {});
long get_long(const json& j, const char* key, const std::string& where);
std::string get_string(const json& j, const char* key, const std::string& where);
subdyn::Rational as_rational(const json& v, const std::string& where);
std::vector<int> parse_int_list(const std::string& csv);

struct Subgroup {
  int rank = 0;
  std::vector<subdyn::Word> generators;
  subdyn::CoreGraph graph;
};
Subgroup parse_subgroup(const json& j, const std::string& where);
json subgroup_json(const subdyn::CoreGraph& g);
std::vector<std::string> word_strings(const std::vector<subdyn::Word>& ws);

// Points are 0-based; permutation keys are the generator letters a, b, ...
subdyn::FiniteAction parse_action(const json& j, const std::string& where);
subdyn::FiniteMPSystem parse_system(const json& j, const std::string& where);
subdyn::AtomicIRS parse_irs(const json& j, const std::string& where);
json irs_json(const subdyn::AtomicIRS& mu);

subdyn::FieldPtr parse_field(const json& j, const std::string& where, const FieldOverrides& o);
subdyn::RatMat parse_entries(const json& j, int n, const std::string& where);
struct MatrixInput {
  subdyn::FieldPtr field;
  subdyn::RatMat entries;
};
// {"field": ..., "n": 2, "entries": [["1","2"],["0","1"]]}
MatrixInput parse_matrix(const json& j, const std::string& where, const FieldOverrides& o);

subdyn::Arena parse_arena(const json& j, const subdyn::FieldPtr& f, int n, const std::string& where);

json vec_json(const subdyn::Vec& v);
json arena_json(const subdyn::Arena& a);
json margins_json(const std::vector<subdyn::MarginRecord>& ms);
json certificate_json(const subdyn::PingPongCertificate& c);
json proximality_json(const subdyn::ProximalityCertificate& c);

}  // namespace cli
