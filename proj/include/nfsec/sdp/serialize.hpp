#pragma once

// Self-describing JSON dump of an SdpProblem. Matrices are stored as
// {"rows", "cols", "data"} with row-major data; doubles round-trip exactly.

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "nfsec/sdp/problem.hpp"

namespace nfsec::sdp {

namespace detail {

using json = nlohmann::json;

inline json matrix_to_json(const Mat& m) {
  json data = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline Mat matrix_from_json(const json& j, const std::string& where) {
  const Index r = j.at("rows").get<Index>();
  const Index c = j.at("cols").get<Index>();
  const auto& d = j.at("data");
  require(r >= 0 && c >= 0 && d.is_array() && static_cast<Index>(d.size()) == r * c, ErrorCode::config,
          where + ": matrix data has wrong length");
  Mat m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index k = 0; k < c; ++k) m(i, k) = d[static_cast<size_t>(i * c + k)].get<double>();
  return m;
}

inline json form_to_json(const LinearForm& f) {
  json terms = json::array();
  for (const auto& t : f.terms) terms.push_back(json::array({t.index, t.coeff}));
  return {{"terms", std::move(terms)}, {"constant", f.constant}};
}

inline LinearForm form_from_json(const json& j) {
  LinearForm f;
  for (const auto& t : j.at("terms")) f.terms.push_back({t.at(0).get<int>(), t.at(1).get<double>()});
  f.constant = j.at("constant").get<double>();
  return f;
}

inline json constraint_to_json(const LinearConstraint& c) {
  return {{"name", c.name}, {"form", form_to_json(c.form)}, {"rhs", c.rhs}};
}

inline LinearConstraint constraint_from_json(const json& j) {
  return {j.at("name").get<std::string>(), form_from_json(j.at("form")), j.at("rhs").get<double>()};
}

}  // namespace detail

inline nlohmann::json to_json(const SdpProblem& p) {
  using detail::json;
  json mv = json::array(), sv = json::array(), lmis = json::array(), eqs = json::array(), ineqs = json::array();
  for (const auto& v : p.matrix_vars())
    mv.push_back({{"name", v.name}, {"dim", v.dim}, {"offset", v.offset}, {"psd", v.psd}});
  for (const auto& v : p.scalar_vars()) {
    json s = {{"name", v.name}, {"offset", v.offset}, {"lower", nullptr}};
    if (v.lower) s["lower"] = *v.lower;
    sv.push_back(std::move(s));
  }
  for (const auto& l : p.lmis()) {
    json cong = json::array(), dense = json::array();
    for (const auto& t : l.congruences)
      cong.push_back({{"var", t.var}, {"coeff", t.coeff}, {"map", detail::matrix_to_json(t.map)}});
    for (const auto& d : l.dense)
      dense.push_back({{"form", detail::form_to_json(d.form)}, {"basis", detail::matrix_to_json(d.basis)}});
    lmis.push_back({{"name", l.name},
                    {"dim", l.dim},
                    {"constant", detail::matrix_to_json(l.constant)},
                    {"congruences", std::move(cong)},
                    {"dense", std::move(dense)}});
  }
  for (const auto& c : p.equalities()) eqs.push_back(detail::constraint_to_json(c));
  for (const auto& c : p.inequalities()) ineqs.push_back(detail::constraint_to_json(c));
  return {{"format", "nfsec-sdp"},
          {"version", 1},
          {"sense", "maximize"},
          {"n_vars", p.n_vars()},
          {"matrix_vars", std::move(mv)},
          {"scalar_vars", std::move(sv)},
          {"lmis", std::move(lmis)},
          {"equalities", std::move(eqs)},
          {"inequalities", std::move(ineqs)},
          {"objective", detail::form_to_json(p.objective())}};
}

inline SdpProblem from_json(const nlohmann::json& j) {
  try {
    require(j.at("format").get<std::string>() == "nfsec-sdp", ErrorCode::config, "not an SDP dump");
    require(j.at("version").get<int>() == 1, ErrorCode::config, "unsupported SDP dump version");
    std::vector<MatrixVar> mv;
    std::vector<ScalarVar> sv;
    std::vector<Lmi> lmis;
    std::vector<LinearConstraint> eqs, ineqs;
    for (const auto& v : j.at("matrix_vars"))
      mv.push_back({v.at("name").get<std::string>(), v.at("dim").get<int>(), v.at("offset").get<int>(),
                    v.at("psd").get<bool>()});
    for (const auto& v : j.at("scalar_vars")) {
      ScalarVar s{v.at("name").get<std::string>(), v.at("offset").get<int>(), std::nullopt};
      if (!v.at("lower").is_null()) s.lower = v.at("lower").get<double>();
      sv.push_back(std::move(s));
    }
    for (const auto& l : j.at("lmis")) {
      Lmi out;
      out.name = l.at("name").get<std::string>();
      out.dim = l.at("dim").get<int>();
      out.constant = detail::matrix_from_json(l.at("constant"), "LMI " + out.name);
      for (const auto& t : l.at("congruences"))
        out.congruences.push_back(
            {t.at("var").get<int>(), detail::matrix_from_json(t.at("map"), "LMI " + out.name), t.at("coeff").get<double>()});
      for (const auto& d : l.at("dense"))
        out.dense.push_back({detail::form_from_json(d.at("form")),
                             detail::matrix_from_json(d.at("basis"), "LMI " + out.name)});
      lmis.push_back(std::move(out));
    }
    for (const auto& c : j.at("equalities")) eqs.push_back(detail::constraint_from_json(c));
    for (const auto& c : j.at("inequalities")) ineqs.push_back(detail::constraint_from_json(c));
    SdpProblem p;
    p.restore(j.at("n_vars").get<int>(), std::move(mv), std::move(sv), std::move(lmis), std::move(eqs),
              std::move(ineqs), detail::form_from_json(j.at("objective")));
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::config, std::string("SDP dump: ") + e.what());
  }
}

inline std::string dump(const SdpProblem& p, int indent = -1) { return to_json(p).dump(indent); }

inline SdpProblem parse(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::config, std::string("SDP dump: ") + e.what());
  }
  return from_json(j);
}

inline void write_file(const SdpProblem& p, const std::string& path) {
  std::ofstream f(path);
  require(static_cast<bool>(f), ErrorCode::io, "cannot open " + path);
  f << dump(p) << '\n';
}

}  // namespace nfsec::sdp
