// Command-line laboratory for analytic quasi-periodic cocycles: finite-scale
// exponent tables, deviation curves with shape fits, block-refinement
// reports, Diophantine scans, sublevel fits, coordinate changes, and
// one-variable harmonic diagnostics.  One seed drives every sampler, and the
// worker count never changes the bytes written.

#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qplab/serialize.hpp"

namespace {

using namespace qplab;
using nlohmann::json;

// Malformed configuration artifacts (config file, cocycle file): exit 65,
// as opposed to semantically invalid parameters (exit 2).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Opts {
  std::string preset;
  std::string cocycle_file;
  std::string freq = "golden";
  std::string scheme = "random";
  std::string out;
  std::string out_cocycle;
  std::string config_path;
  double rho = -1.0;  // < 0 keeps the source strip half-width
  long long samples = 1000;
  long long seed = 0;
  bool validate_only = false;

  std::string n_list = "50,100,200";
  std::string eps_list = "0.05";
  double target = 0.1;
  long long n0 = 20;
  long long n1 = 400;
  long long Kmax = 100000;
  std::string dioph_mode = "standard";
  double delta0 = 0.0;
  double eta = 0.5;
  int tmin_exp = 20;
  std::string harm_op = "profile";
  long long grid_N = 8192;
  int K = 64;
  int depth = 12;
  long long harm_n = 1;
  double eps0 = 0.25;
  double eps1 = -1.0;  // < 0 means the largest admissible value eps0^4
};

std::vector<long long> parse_ll_list(const std::string& text) {
  std::vector<long long> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string tok = text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad integer '" + tok + "' in list");
    }
    if (used != tok.size())
      throw std::invalid_argument("bad integer '" + tok + "' in list");
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty integer list");
  return out;
}

std::vector<double> parse_d_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string tok = text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad number '" + tok + "' in list");
    }
    if (used != tok.size())
      throw std::invalid_argument("bad number '" + tok + "' in list");
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty number list");
  return out;
}

FourierCocycle load_cocycle(const Opts& o) {
  FourierCocycle A;
  if (!o.cocycle_file.empty()) {
    try {
      A = read_cocycle_file(o.cocycle_file);
    } catch (const json::exception& e) {
      throw config_error(std::string("cocycle file: ") + e.what());
    }
  } else {
    A = parse_preset(o.preset);
  }
  if (o.rho >= 0.0) A.rho = o.rho;
  return A;
}

SampleScheme parse_scheme(const std::string& s) {
  if (s == "random") return SampleScheme::random;
  if (s == "lattice") return SampleScheme::lattice;
  throw std::invalid_argument("scheme must be random or lattice");
}

DiophMode parse_dioph_mode(const std::string& s) {
  if (s == "standard") return DiophMode::standard;
  if (s == "strong") return DiophMode::strong;
  throw std::invalid_argument("mode must be standard or strong");
}

void emit(const Opts& o, const std::string& text) {
  if (o.out.empty())
    std::cout << text;
  else
    write_text_file(o.out, text);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Every violated precondition, without running anything.
std::vector<std::string> validate_config(const std::string& cmd, const Opts& o) {
  std::vector<std::string> diags;
  auto diag = [&](const std::string& s) { diags.push_back(s); };

  const bool needs_cocycle = cmd != "dioph";
  const bool needs_sampler =
      cmd == "le" || cmd == "ldt" || cmd == "ap" || cmd == "loja" || cmd == "report";

  FourierCocycle A;
  bool have_A = false;
  if (needs_cocycle) {
    if (!o.preset.empty() && !o.cocycle_file.empty())
      diag("give either --preset or --cocycle, not both");
    else if (o.preset.empty() && o.cocycle_file.empty())
      diag("missing cocycle source (--preset or --cocycle)");
    else {
      try {
        A = load_cocycle(o);
        have_A = true;
      } catch (const std::exception& e) {
        diag(std::string("cocycle source: ") + e.what());
      }
    }
  }

  Frequency f;
  bool have_f = false;
  try {
    f = parse_frequency(o.freq);
    have_f = true;
  } catch (const std::exception& e) {
    diag(std::string("frequency: ") + e.what());
  }
  if (have_A && have_f && f.dim() != A.d)
    diag("frequency dimension does not match the cocycle");

  if (needs_sampler) {
    if (o.samples < 1) diag("samples must be >= 1");
    try {
      parse_scheme(o.scheme);
    } catch (const std::exception& e) {
      diag(e.what());
    }
  }

  auto check_ns = [&](bool need_three) {
    try {
      auto ns = parse_ll_list(o.n_list);
      for (long long n : ns)
        if (n < 1) diag("every n in --n must be >= 1");
      if (need_three && ns.size() < 3)
        diag("the scale fit needs at least 3 values in --n");
    } catch (const std::exception& e) {
      diag(std::string("--n: ") + e.what());
    }
  };
  auto check_eps = [&] {
    try {
      auto es = parse_d_list(o.eps_list);
      for (double e : es)
        if (!(e >= 0.0)) diag("every epsilon in --eps must be >= 0");
    } catch (const std::exception& e) {
      diag(std::string("--eps: ") + e.what());
    }
  };

  if (cmd == "le") check_ns(false);
  if (cmd == "ldt" || cmd == "report") {
    check_ns(cmd == "ldt");
    check_eps();
    if (!(o.target > 0.0 && o.target < 1.0)) diag("--target must be in (0,1)");
  }
  if (cmd == "ap") {
    if (o.n0 < 1) diag("--n0 must be >= 1");
    if (o.n1 < 5 * o.n0)
      diag("block partition needs n1 >= 5*n0 (three-piece shifted split)");
    if (have_A && A.m < 2) diag("block refinement needs matrix dimension >= 2");
  }
  if (cmd == "dioph" || cmd == "report") {
    if (o.Kmax < 1) diag("--Kmax must be >= 1");
    try {
      DiophMode m = parse_dioph_mode(o.dioph_mode);
      if (m == DiophMode::strong && have_f && f.dim() != 1)
        diag("strong Diophantine scans need a one-dimensional frequency");
    } catch (const std::exception& e) {
      diag(e.what());
    }
    if (o.delta0 < 0.0) diag("--delta0 must be >= 0");
    if (!(o.eta > 0.0)) diag("--eta must be > 0");
  }
  if (cmd == "loja") {
    if (o.tmin_exp < 1) diag("--tmin-exp must be >= 1");
  }
  if (cmd == "coord") {
    if (have_A && A.d < 2) diag("coordinate changes need torus dimension >= 2");
  }
  if (cmd == "harm") {
    if (have_A && A.d != 1) diag("harmonic diagnostics run on the circle (d = 1)");
    if (o.harm_n < 1) diag("--power must be >= 1");
    if (o.harm_op == "profile" || o.harm_op == "boost") {
      if (o.K < 1) diag("--K must be >= 1");
      if (o.grid_N < 4LL * std::max(o.K, 1)) diag("profile needs --N >= 4*K");
    }
    if (o.harm_op == "bmo") {
      if (o.depth < 0) diag("--depth must be >= 0");
      if (o.depth > 30 || o.grid_N < (1LL << std::min(o.depth, 30)))
        diag("bmo needs --N >= 2^depth");
    }
    if (o.harm_op == "boost") {
      if (!(o.eps0 > 0.0 && o.eps0 < 1.0)) diag("--eps0 must be in (0,1)");
      if (o.eps1 >= 0.0 && o.eps1 > std::pow(o.eps0, 4.0))
        diag("--eps1 must be <= eps0^4");
    }
    if (o.harm_op != "profile" && o.harm_op != "bmo" && o.harm_op != "boost")
      diag("--op must be profile, bmo, or boost");
  }
  return diags;
}

void run_le(const Opts& o) {
  FourierCocycle A = load_cocycle(o);
  Frequency f = parse_frequency(o.freq);
  auto sampler = sample_grid(A.d, o.samples, parse_scheme(o.scheme),
                             static_cast<std::uint64_t>(o.seed));
  std::vector<FiniteScaleSpectrum> table;
  for (long long n : parse_ll_list(o.n_list))
    table.push_back(finite_scale_spectrum(A, f, n, sampler));
  emit(o, csv_spectrum(table));
}

void run_ldt(const Opts& o) {
  FourierCocycle A = load_cocycle(o);
  Frequency f = parse_frequency(o.freq);
  auto sampler = sample_grid(A.d, o.samples, parse_scheme(o.scheme),
                             static_cast<std::uint64_t>(o.seed));
  auto rows = deviation_curve(A, f, parse_ll_list(o.n_list),
                              parse_d_list(o.eps_list), sampler);
  LdtFit fit = ldt_fit(rows, o.target);
  if (o.out.empty()) {
    std::cout << csv_deviations(rows) << dump(json_report(fit));
  } else {
    write_text_file(o.out, csv_deviations(rows));
    write_text_file(o.out + ".fit.json", dump(json_report(fit)));
  }
}

void run_ap(const Opts& o) {
  FourierCocycle A = load_cocycle(o);
  Frequency f = parse_frequency(o.freq);
  auto sampler = sample_grid(A.d, o.samples, parse_scheme(o.scheme),
                             static_cast<std::uint64_t>(o.seed));
  emit(o, dump(json_report(multiscale_refine(A, f, o.n0, o.n1, sampler))));
}

void run_dioph(const Opts& o) {
  Frequency f = parse_frequency(o.freq);
  DiophantineReport rep = diophantine_scan(f, parse_dioph_mode(o.dioph_mode),
                                           o.Kmax, o.delta0, o.eta);
  emit(o, dump(json_report(rep)));
}

void run_loja(const Opts& o) {
  FourierCocycle A = load_cocycle(o);
  auto sampler = sample_grid(A.d, o.samples, parse_scheme(o.scheme),
                             static_cast<std::uint64_t>(o.seed));
  DeterminantFunction<double> det{A};
  LojaFit fit = loja_fit([&](const TorusPoint& x) { return det(x); }, sampler,
                         dyadic_t_grid(o.tmin_exp));
  emit(o, dump(json_report(fit)));
}

void run_coord(const Opts& o) {
  FourierCocycle A = load_cocycle(o);
  Frequency f = parse_frequency(o.freq);
  CoordinateChange cc = coordinate_matrix(A.d);
  auto [B, g] = change_coordinates(A, f, cc.M);
  json j = json_report(cc);
  std::vector<double> w(g.omega.data(), g.omega.data() + g.omega.size());
  j["omega_new"] = w;
  j["rho_new"] = B.rho;
  if (g.declared_t) j["declared_t_new"] = *g.declared_t;
  if (!o.out_cocycle.empty())
    write_text_file(o.out_cocycle, dump(json_cocycle(B)));
  emit(o, dump(j));
}

void run_harm(const Opts& o) {
  FourierCocycle A = load_cocycle(o);
  Frequency f = parse_frequency(o.freq);
  std::vector<double> u(static_cast<std::size_t>(o.grid_N));
  parallel_for(u.size(), [&](std::size_t i) {
    Eigen::VectorXd x(1);
    x[0] = static_cast<double>(i) / static_cast<double>(o.grid_N);
    u[i] = u_scale(A, f, TorusPoint(x), o.harm_n);
  });
  if (o.harm_op == "profile") {
    emit(o, csv_profile(fourier_decay_profile(u, o.K)));
  } else if (o.harm_op == "bmo") {
    double b = bmo_norm(u, o.depth);
    emit(o, dump(json{{"bmo_norm", b},
                      {"max_depth", o.depth},
                      {"samples", o.grid_N}}));
  } else {
    double S_emp = fourier_decay_profile(u, o.K).decay_constant;
    double eps1 = o.eps1 >= 0.0 ? o.eps1 : std::pow(o.eps0, 4.0);
    JnBoostReport rep = jn_boost_check(u, o.eps0, eps1, S_emp);
    json j = json_report(rep);
    j["eps0"] = o.eps0;
    j["eps1"] = eps1;
    j["S_emp"] = S_emp;
    emit(o, dump(j));
  }
}

void run_report(const Opts& o) {
  FourierCocycle A = load_cocycle(o);
  Frequency f = parse_frequency(o.freq);
  auto sampler = sample_grid(A.d, o.samples, parse_scheme(o.scheme),
                             static_cast<std::uint64_t>(o.seed));
  json j;
  j["diophantine"] = json_report(diophantine_scan(
      f, parse_dioph_mode(o.dioph_mode), o.Kmax, o.delta0, o.eta));
  j["spectrum"] = json::array();
  auto ns = parse_ll_list(o.n_list);
  for (long long n : ns) {
    FiniteScaleSpectrum sp = finite_scale_spectrum(A, f, n, sampler);
    std::vector<double> L(sp.les.data(), sp.les.data() + sp.les.size());
    std::vector<double> se(sp.std_errors.data(),
                           sp.std_errors.data() + sp.std_errors.size());
    j["spectrum"].push_back(json{{"n", sp.n},
                                 {"L", L},
                                 {"stderr", se},
                                 {"samples", sp.sample_count},
                                 {"excluded", sp.excluded_count}});
  }
  auto rows = deviation_curve(A, f, ns, parse_d_list(o.eps_list), sampler);
  j["deviations"] = json::array();
  for (const auto& r : rows)
    j["deviations"].push_back(json{{"n", r.n},
                                   {"epsilon", r.epsilon},
                                   {"measure", r.measure},
                                   {"samples", r.samples}});
  try {
    j["ldt_fit"] = json_report(ldt_fit(rows, o.target));
  } catch (const std::invalid_argument&) {
    j["ldt_fit"] = nullptr;  // too few scales for a fit; curve still reported
  }
  emit(o, dump(j));
}

struct Registry {
  std::map<const CLI::App*,
           std::map<std::string,
                    std::pair<CLI::Option*, std::function<void(const json&)>>>>
      table;

  template <class T>
  void add(CLI::App* cmd, const std::string& key, T& var, const std::string& desc) {
    CLI::Option* opt = cmd->add_option("--" + key, var, desc);
    table[cmd][key] = {opt, [&var](const json& j) { var = j.get<T>(); }};
  }
  void add_flag(CLI::App* cmd, const std::string& key, bool& var,
                const std::string& desc) {
    CLI::Option* opt = cmd->add_flag("--" + key, var, desc);
    table[cmd][key] = {opt, [&var](const json& j) { var = j.get<bool>(); }};
  }
};

}  // namespace

int main(int argc, char** argv) {
  static const std::set<std::string> known = {"le",   "ldt",   "ap",   "dioph",
                                              "loja", "coord", "harm", "report"};
  if (argc >= 2 && argv[1][0] != '-' && known.count(argv[1]) == 0) {
    std::fprintf(stderr, "unknown command '%s'\n", argv[1]);
    return 64;
  }

  Opts o;
  CLI::App app{"numerical laboratory for quasi-periodic linear cocycles"};
  app.require_subcommand(0, 1);
  Registry reg;

  auto* le = app.add_subcommand("le", "finite-scale exponent table over an n schedule");
  auto* ldt = app.add_subcommand("ldt", "deviation-set curve with shape fits");
  auto* ap = app.add_subcommand("ap", "two-scale block refinement report");
  auto* dioph = app.add_subcommand("dioph", "Diophantine constant scan");
  auto* loja = app.add_subcommand("loja", "sublevel-measure fit of the determinant");
  auto* coord = app.add_subcommand("coord", "unimodular coordinate change");
  auto* harm = app.add_subcommand("harm", "harmonic diagnostics (profile/bmo/boost)");
  auto* report = app.add_subcommand("report", "bundle scan, spectrum, and deviations");

  auto add_common = [&](CLI::App* cmd, bool cocycle, bool sampling) {
    if (cocycle) {
      reg.add(cmd, "preset", o.preset,
              "cocycle preset: const-diag:v1,v2,..., rotation, "
              "schrodinger:lambda[,E], diag-cos[:d]");
      reg.add(cmd, "cocycle", o.cocycle_file, "cocycle JSON file");
      reg.add(cmd, "rho", o.rho, "override the strip half-width (>= 0)");
    }
    reg.add(cmd, "freq", o.freq,
            "frequency: golden, sqrt2, cbrt2-pair, or comma decimals");
    if (sampling) {
      reg.add(cmd, "samples", o.samples, "number of base points");
      reg.add(cmd, "scheme", o.scheme, "sampling scheme: random or lattice");
    }
    reg.add(cmd, "seed", o.seed, "seed for every sampler in the run");
    reg.add(cmd, "out", o.out, "output path (default stdout)");
    reg.add(cmd, "config", o.config_path, "JSON config; flags take precedence");
    reg.add_flag(cmd, "validate", o.validate_only,
                 "list violated preconditions and exit");
  };

  add_common(le, true, true);
  reg.add(le, "n", o.n_list, "comma list of scales");

  add_common(ldt, true, true);
  reg.add(ldt, "n", o.n_list, "comma list of scales");
  reg.add(ldt, "eps", o.eps_list, "comma list of deviation thresholds");
  reg.add(ldt, "target", o.target, "target measure for the epsilon-star fit");

  add_common(ap, true, true);
  reg.add(ap, "n0", o.n0, "base scale");
  reg.add(ap, "n1", o.n1, "refined scale (>= 5*n0)");

  add_common(dioph, false, false);
  reg.add(dioph, "Kmax", o.Kmax, "scan box radius");
  reg.add(dioph, "mode", o.dioph_mode, "standard or strong");
  reg.add(dioph, "delta0", o.delta0, "standard-mode exponent offset");
  reg.add(dioph, "eta", o.eta, "strong-mode log exponent");

  add_common(loja, true, true);
  reg.add(loja, "tmin-exp", o.tmin_exp, "smallest dyadic level 2^-e in the t grid");

  add_common(coord, true, false);
  reg.add(coord, "out-cocycle", o.out_cocycle, "write the transformed cocycle here");

  add_common(harm, true, false);
  reg.add(harm, "op", o.harm_op, "profile, bmo, or boost");
  reg.add(harm, "N", o.grid_N, "uniform grid size on the circle");
  reg.add(harm, "K", o.K, "profile bandwidth");
  reg.add(harm, "depth", o.depth, "dyadic depth for bmo");
  reg.add(harm, "power", o.harm_n, "iterate order n for u = (1/n) log ||A^(n)||");
  reg.add(harm, "eps0", o.eps0, "weak deviation level");
  reg.add(harm, "eps1", o.eps1, "weak measure budget (default eps0^4)");

  add_common(report, true, true);
  reg.add(report, "n", o.n_list, "comma list of scales");
  reg.add(report, "eps", o.eps_list, "comma list of deviation thresholds");
  reg.add(report, "target", o.target, "target measure for the epsilon-star fit");
  reg.add(report, "Kmax", o.Kmax, "scan box radius");
  reg.add(report, "mode", o.dioph_mode, "standard or strong");
  reg.add(report, "delta0", o.delta0, "standard-mode exponent offset");
  reg.add(report, "eta", o.eta, "strong-mode log exponent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 65;
  }

  auto parsed = app.get_subcommands();
  if (parsed.empty()) {
    std::cerr << app.help();
    return 64;
  }
  CLI::App* active = parsed.front();
  const std::string cmd = active->get_name();

  try {
    if (!o.config_path.empty()) {
      json cfg;
      try {
        cfg = json::parse(read_text_file(o.config_path));
      } catch (const json::exception& e) {
        throw config_error(std::string("config: ") + e.what());
      }
      if (!cfg.is_object()) throw config_error("config: expected a JSON object");
      auto& opts_of = reg.table[active];
      for (const auto& [key, val] : cfg.items()) {
        auto it = opts_of.find(key);
        if (it == opts_of.end())
          throw config_error("config: unknown key '" + key + "' for " + cmd);
        if (it->second.first->count() == 0) {
          try {
            it->second.second(val);
          } catch (const json::exception& e) {
            throw config_error("config: bad value for '" + key + "': " + e.what());
          }
        }
      }
    }

    auto diags = validate_config(cmd, o);
    if (o.validate_only) {
      for (const auto& d : diags) std::cout << d << "\n";
      return diags.empty() ? 0 : 2;
    }
    if (!diags.empty()) {
      for (const auto& d : diags) std::cerr << d << "\n";
      return 2;
    }

    if (cmd == "le") run_le(o);
    else if (cmd == "ldt") run_ldt(o);
    else if (cmd == "ap") run_ap(o);
    else if (cmd == "dioph") run_dioph(o);
    else if (cmd == "loja") run_loja(o);
    else if (cmd == "coord") run_coord(o);
    else if (cmd == "harm") run_harm(o);
    else run_report(o);
  } catch (const config_error& e) {
    std::cerr << e.what() << "\n";
    return 65;
  } catch (const guard_error& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << e.what() << "\n";
    return 65;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
