#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qplab/analysis.hpp"
#include "qplab/avalanche.hpp"
#include "qplab/cocycle.hpp"
#include "qplab/deviations.hpp"
#include "qplab/harmonic.hpp"
#include "qplab/lyapunov.hpp"
#include "qplab/torus.hpp"

namespace qplab {

using nlohmann::json;

inline json json_report(const DiophantineReport& r) {
  json j;
  j["mode"] = r.mode == DiophMode::standard ? "standard" : "strong";
  j["K_max"] = r.K_max;
  j["t_hat"] = r.t_hat;
  std::vector<int> k(r.argmin_k.data(), r.argmin_k.data() + r.argmin_k.size());
  j["argmin_k"] = k;
  j["delta0"] = r.delta0;
  j["eta"] = r.eta;
  return j;
}

inline json json_report(const MultiscaleReport& r) {
  return json{{"n0", r.n0},
              {"n1", r.n1},
              {"L_n0", r.L_n0},
              {"L_2n0", r.L_2n0},
              {"predicted_L_n1", r.predicted_L_n1},
              {"measured_L_n1", r.measured_L_n1},
              {"residual", r.residual},
              {"hypothesis_failure_fraction", r.hypothesis_failure_fraction}};
}

inline json json_report(const LdtFit& f) {
  return json{{"b_hat", f.b_hat},
              {"alpha", f.alpha},
              {"beta", f.beta},
              {"r2", f.r2},
              {"epsilon_used", f.epsilon_used},
              {"C_hat", f.C_hat},
              {"a_hat", f.a_hat},
              {"has_epsilon_fit", f.has_epsilon_fit},
              {"below_resolution", f.below_resolution},
              {"scales_used", f.scales_used}};
}

inline json json_report(const LojaFit& f) {
  return json{{"S_hat", f.S_hat},          {"b_hat", f.b_hat},
              {"t_grid", f.t_grid},        {"measures", f.measures},
              {"max_violation", f.max_violation},
              {"degenerate", f.degenerate},
              {"samples", f.samples}};
}

inline json json_report(const CoordinateChange& cc) {
  std::vector<std::vector<long long>> rows;
  for (Eigen::Index i = 0; i < cc.M.rows(); ++i) {
    std::vector<long long> row;
    for (Eigen::Index j = 0; j < cc.M.cols(); ++j) row.push_back(cc.M(i, j));
    rows.push_back(std::move(row));
  }
  return json{{"d", cc.M.rows()},
              {"M", rows},
              {"det", cc.det_check},
              {"primitive_power", cc.primitive_power},
              {"charpoly_ok", cc.charpoly_ok},
              {"no_unit_root", cc.no_unit_root}};
}

inline json json_report(const JnBoostReport& r) {
  return json{{"mean", r.mean},
              {"weak_measure", r.weak_measure},
              {"boosted_measure", r.boosted_measure},
              {"prediction", r.prediction},
              {"c_used", r.c_used},
              {"pass", r.pass}};
}

inline json json_report(const APCertificate& c) {
  return json{{"n_blocks", c.n_blocks},
              {"epsilon", c.epsilon},
              {"kappa_inv", c.kappa_inv},
              {"hypothesis_ok", c.hypothesis_ok},
              {"predicted_bound", c.predicted_bound},
              {"actual_error", c.actual_error}};
}

// Cocycle files: { "d", "m", "rho", "modes": [ { "k", "cos", "sin" } ] },
// matrices as row lists.  "sin" may be omitted for even modes.

inline json json_cocycle(const FourierCocycle& A) {
  json j;
  j["d"] = A.d;
  j["m"] = A.m;
  j["rho"] = A.rho;
  j["modes"] = json::array();
  for (const auto& mo : A.modes) {
    json jm;
    std::vector<int> k(mo.k.data(), mo.k.data() + mo.k.size());
    jm["k"] = k;
    auto mat_rows = [](const MatX& M) {
      std::vector<std::vector<double>> rows;
      for (Eigen::Index i = 0; i < M.rows(); ++i) {
        std::vector<double> row;
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(i, c));
        rows.push_back(std::move(row));
      }
      return rows;
    };
    jm["cos"] = mat_rows(mo.c);
    jm["sin"] = mat_rows(mo.s);
    j["modes"].push_back(std::move(jm));
  }
  return j;
}

inline FourierCocycle cocycle_from_json(const json& j) {
  FourierCocycle A;
  A.d = j.at("d").get<int>();
  A.m = j.at("m").get<int>();
  A.rho = j.at("rho").get<double>();
  auto mat_of = [&](const json& rows) {
    MatX M(A.m, A.m);
    if (static_cast<int>(rows.size()) != A.m)
      throw std::invalid_argument("cocycle file: matrix row count != m");
    for (int i = 0; i < A.m; ++i) {
      if (static_cast<int>(rows[i].size()) != A.m)
        throw std::invalid_argument("cocycle file: matrix column count != m");
      for (int c = 0; c < A.m; ++c) M(i, c) = rows[i][c].get<double>();
    }
    return M;
  };
  for (const auto& jm : j.at("modes")) {
    Mode mo;
    auto kv = jm.at("k").get<std::vector<int>>();
    if (static_cast<int>(kv.size()) != A.d)
      throw std::invalid_argument("cocycle file: mode index length != d");
    mo.k = Eigen::Map<Eigen::VectorXi>(kv.data(), kv.size());
    mo.c = mat_of(jm.at("cos"));
    mo.s = jm.contains("sin") ? mat_of(jm.at("sin")) : MatX::Zero(A.m, A.m);
    A.modes.push_back(std::move(mo));
  }
  A.validate();
  return A;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline FourierCocycle read_cocycle_file(const std::string& path) {
  return cocycle_from_json(json::parse(read_text_file(path)));
}

// CSV emission at 17 significant digits so reruns diff byte-for-byte.

inline std::string csv_spectrum(const std::vector<FiniteScaleSpectrum>& table) {
  std::string out = "n,j,L_j,stderr,samples\n";
  for (const auto& sp : table)
    for (Eigen::Index j = 0; j < sp.les.size(); ++j) {
      out += std::to_string(sp.n) + "," + std::to_string(j + 1) + "," +
             fmt_g17(sp.les[j]) + "," + fmt_g17(sp.std_errors[j]) + "," +
             std::to_string(sp.sample_count) + "\n";
    }
  return out;
}

inline std::string csv_deviations(const std::vector<DeviationRow>& rows) {
  std::string out = "n,epsilon,measure,samples\n";
  for (const auto& r : rows)
    out += std::to_string(r.n) + "," + fmt_g17(r.epsilon) + "," +
           fmt_g17(r.measure) + "," + std::to_string(r.samples) + "\n";
  return out;
}

inline std::string csv_profile(const FourierProfile& p) {
  std::string out = "k,re,im,decay\n";
  for (int k = -p.K; k <= p.K; ++k) {
    double d = std::abs(k) * std::abs(p.at(k));
    out += std::to_string(k) + "," + fmt_g17(p.at(k).real()) + "," +
           fmt_g17(p.at(k).imag()) + "," + fmt_g17(d) + "\n";
  }
  return out;
}

inline std::string csv_probe(const ContinuityProbe& p) {
  std::string out = "delta,dL1,dist_tau\n";
  for (const auto& r : p.rows)
    out += fmt_g17(r.delta) + "," + fmt_g17(r.dL1) + "," + fmt_g17(r.dist) + "\n";
  return out;
}

}  // namespace qplab
