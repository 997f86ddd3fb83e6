#include "rsdrl/json_io.hpp"

#include <string>

#include "rsdrl/errors.hpp"

namespace rsdrl {

using nlohmann::json;

json mdp_to_json(const TabularMDP& mdp) {
  json P = json::array(), r = json::array();
  for (int h = 0; h < mdp.H(); ++h) {
    json Ph = json::array(), rh = json::array();
    for (int s = 0; s < mdp.S(); ++s) {
      json Ps = json::array(), rs = json::array();
      for (int a = 0; a < mdp.A(); ++a) {
        auto row = mdp.row(h, s, a);
        Ps.push_back(json(std::vector<double>(row.begin(), row.end())));
        rs.push_back(mdp.r(h, s, a));
      }
      Ph.push_back(std::move(Ps));
      rh.push_back(std::move(rs));
    }
    P.push_back(std::move(Ph));
    r.push_back(std::move(rh));
  }
  return {{"S", mdp.S()},  {"A", mdp.A()}, {"H", mdp.H()}, {"initial_state", mdp.initial_state()},
          {"P", std::move(P)}, {"r", std::move(r)}};
}

namespace {

int read_positive(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer())
    throw InputError(std::string("MDP field '") + key + "' missing or not an integer");
  const int v = j[key].get<int>();
  if (v < 1) throw InputError(std::string("MDP field '") + key + "' must be positive");
  return v;
}

const json& expect_array(const json& j, std::size_t n, const std::string& what) {
  if (!j.is_array() || j.size() != n)
    throw InputError(what + " must be an array of length " + std::to_string(n));
  return j;
}

double expect_number(const json& j, const std::string& what) {
  if (!j.is_number()) throw InputError(what + " must be a number");
  return j.get<double>();
}

}  // namespace

TabularMDP mdp_from_json(const json& j) {
  if (!j.is_object()) throw InputError("MDP document must be a JSON object");
  const int S = read_positive(j, "S"), A = read_positive(j, "A"), H = read_positive(j, "H");
  int init = 0;
  if (j.contains("initial_state")) {
    if (!j["initial_state"].is_number_integer()) throw InputError("initial_state must be an integer");
    init = j["initial_state"].get<int>();
  }
  if (init < 0 || init >= S) throw InputError("initial_state out of range");
  if (!j.contains("P") || !j.contains("r")) throw InputError("MDP requires fields 'P' and 'r'");
  TabularMDP m(S, A, H, init);
  const json& P = expect_array(j["P"], H, "P");
  const json& r = expect_array(j["r"], H, "r");
  for (int h = 0; h < H; ++h) {
    expect_array(P[h], S, "P[h]");
    expect_array(r[h], S, "r[h]");
    for (int s = 0; s < S; ++s) {
      expect_array(P[h][s], A, "P[h][s]");
      expect_array(r[h][s], A, "r[h][s]");
      for (int a = 0; a < A; ++a) {
        expect_array(P[h][s][a], S, "P[h][s][a]");
        for (int n = 0; n < S; ++n) m.p(h, s, a, n) = expect_number(P[h][s][a][n], "P entry");
        m.r(h, s, a) = expect_number(r[h][s][a], "r entry");
      }
    }
  }
  m.validate();
  return m;
}

json policy_to_json(const Policy& policy) {
  json out = json::array();
  for (int h = 0; h < policy.H(); ++h) {
    json row = json::array();
    for (int s = 0; s < policy.S(); ++s) row.push_back(policy(h, s));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace rsdrl
