#pragma once

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gpres/asymptotics.hpp"
#include "gpres/divergences.hpp"
#include "gpres/errors.hpp"
#include "gpres/free_structure.hpp"
#include "gpres/io.hpp"
#include "gpres/lorenz.hpp"
#include "gpres/state.hpp"
#include "gpres/witness.hpp"
#include "gpres/work.hpp"

// Command-line front end.  Every subcommand reads state files, calls the
// corresponding library routine, and prints a JSON document; exit codes are
// 0 on success, 1 on domain or solver errors, 2 on I/O, parse, or usage
// errors.

namespace gpres {

namespace detail {

inline constexpr const char* kUnitsNote = "energy units of 1/beta unless beta carries units";

inline void write_csv_file(const std::string& path, const std::string& body) {
  std::ofstream f(path);
  if (!f) throw ParseError(path + ": cannot open for writing");
  f << body;
}

}  // namespace detail

inline int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"grand-potential resource theory calculator for quasiclassical states"};
  app.require_subcommand(1);

  const auto emit = [&out](const nlohmann::json& j) { out << j.dump(2) << '\n'; };

  std::string file_a, file_b, csv_path, battery_path;
  double eps = 0.05;
  double charge = 0.0;
  std::size_t n_max = 50;

  CLI::App* gibbs = app.add_subcommand("gibbs", "equilibrium state of a spectrum file");
  gibbs->add_option("file", file_a, "state file")->required();
  gibbs->callback([&] {
    const QCState loaded = load_state_file(file_a).state;
    const QCState g = gibbs_state(loaded.spectrum, loaded.theory);
    nlohmann::json j = state_to_json(g);
    j["log_z"] = g.log_z;
    emit(j);
  });

  CLI::App* lorenz = app.add_subcommand("lorenz", "rescaled Lorenz curve of a state");
  lorenz->add_option("file", file_a, "state file")->required();
  lorenz->add_option("--csv", csv_path, "write curve breakpoints as CSV t,L");
  lorenz->callback([&] {
    const LorenzCurve c = build_lorenz(load_state_file(file_a).state);
    if (!csv_path.empty()) {
      std::ostringstream ss;
      write_lorenz_csv(ss, c);
      detail::write_csv_file(csv_path, ss.str());
    }
    emit({{"t", c.t}, {"L", c.L}});
  });

  CLI::App* compare = app.add_subcommand("compare", "equimajorization order between two states");
  compare->add_option("file_a", file_a, "state file")->required();
  compare->add_option("file_b", file_b, "state file")->required();
  compare->callback([&] {
    const QCState a = load_state_file(file_a).state;
    const QCState b = load_state_file(file_b).state;
    emit({{"a_to_b", equimajorizes(a, b)}, {"b_to_a", equimajorizes(b, a)}});
  });

  CLI::App* witness = app.add_subcommand("witness", "stochastic conversion matrix, if one exists");
  witness->add_option("file_a", file_a, "source state file")->required();
  witness->add_option("file_b", file_b, "target state file")->required();
  witness->callback([&] {
    const QCState a = load_state_file(file_a).state;
    const QCState b = load_state_file(file_b).state;
    const auto w = find_witness(a, b);
    if (!w) {
      emit({{"exists", false}});
      return;
    }
    nlohmann::json j = witness_to_json(*w);
    j["exists"] = true;
    emit(j);
  });

  CLI::App* beps = app.add_subcommand("b-eps", "minimal type II error at type I level eps");
  beps->add_option("file", file_a, "state file")->required();
  beps->add_option("--eps", eps, "type I error level")->capture_default_str();
  beps->callback([&] {
    const QCState s = load_state_file(file_a).state;
    emit({{"eps", eps}, {"b_eps", type2_error(build_lorenz(s), eps)}});
  });

  CLI::App* dh = app.add_subcommand("dh", "hypothesis-testing relative entropy");
  dh->add_option("file", file_a, "state file")->required();
  dh->add_option("--eps", eps, "type I error level")->capture_default_str();
  dh->callback([&] {
    const QCState s = load_state_file(file_a).state;
    emit({{"eps", eps}, {"dh", ext_real_to_json(dh_entropy(s, eps))}});
  });

  CLI::App* wgain = app.add_subcommand("work-gain", "one-shot extractable work");
  wgain->add_option("file", file_a, "state file")->required();
  wgain->add_option("--eps", eps, "failure probability")->capture_default_str();
  wgain->callback([&] {
    const QCState s = load_state_file(file_a).state;
    emit({{"eps", eps},
          {"w_gain", ext_real_to_json(work_gain(s, eps))},
          {"units", detail::kUnitsNote}});
  });

  CLI::App* wcost = app.add_subcommand("work-cost", "one-shot formation work bounds");
  wcost->add_option("file", file_a, "state file")->required();
  wcost->add_option("--eps", eps, "failure probability")->capture_default_str();
  wcost->callback([&] {
    const WorkReport rep = work_report(load_state_file(file_a).state, eps);
    emit({{"eps", rep.eps},
          {"w_gain", ext_real_to_json(rep.w_gain)},
          {"w_cost_lower", rep.w_cost_lower},
          {"w_cost_upper", rep.w_cost_upper},
          {"asymptotic_rate", rep.asymptotic_rate},
          {"units", detail::kUnitsNote}});
  });

  CLI::App* channel = app.add_subcommand("channel", "work extraction channel against a battery");
  channel->add_option("file", file_a, "state file")->required();
  channel->add_option("--eps", eps, "failure probability")->capture_default_str();
  channel->add_option("--battery", battery_path, "battery spectrum file (default: synthetic)");
  channel->add_option("--charge", charge, "initial battery level energy")->capture_default_str();
  channel->callback([&] {
    const QCState s = load_state_file(file_a).state;
    Spectrum battery;
    bool synthetic = battery_path.empty();
    if (synthetic) {
      const ExtReal dhv = dh_entropy(s, eps);
      if (dhv.infinite) throw SolverError("channel: infinite work yield");
      const double w = dhv.value / s.theory.beta;
      battery.levels = {{charge, 0.0}, {charge + w, 0.0}};
    } else {
      battery = load_state_file(battery_path).state.spectrum;
    }
    const ExtractionChannel ch = build_extraction_channel(s, eps, battery, charge);
    emit({{"eps", eps},
          {"work", ch.work},
          {"rows", ch.rows},
          {"cols", ch.cols},
          {"data", ch.m},
          {"level_in", ch.level_in},
          {"level_out", ch.level_out},
          {"modified_bath", ch.modified_bath},
          {"synthetic_battery", synthetic},
          {"units", detail::kUnitsNote}});
  });

  CLI::App* rate = app.add_subcommand("rate", "asymptotic conversion rate between two states");
  rate->add_option("file_a", file_a, "source state file")->required();
  rate->add_option("file_b", file_b, "target state file")->required();
  rate->callback([&] {
    const QCState a = load_state_file(file_a).state;
    const QCState b = load_state_file(file_b).state;
    emit({{"rate", conversion_rate(a, b)}});
  });

  CLI::App* asym = app.add_subcommand("asymptotics", "many-copy sweep of D_H^eps");
  asym->add_option("file", file_a, "state file")->required();
  asym->add_option("--eps", eps, "type I error level")->capture_default_str();
  asym->add_option("--n", n_max, "largest copy count")->capture_default_str();
  asym->add_option("--csv", csv_path, "write sweep as CSV n,exact,leading,correction,residual");
  asym->callback([&] {
    const QCState s = load_state_file(file_a).state;
    std::vector<SecondOrderExpansion> sweep;
    for (std::size_t n = 1; n <= n_max; ++n) sweep.push_back(normal_approx_dh(s, n, eps));
    if (!csv_path.empty()) {
      std::ostringstream ss;
      write_sweep_csv(ss, sweep);
      detail::write_csv_file(csv_path, ss.str());
    }
    nlohmann::json points = nlohmann::json::array();
    for (const SecondOrderExpansion& e : sweep)
      points.push_back({{"n", e.n},
                        {"exact", e.exact ? nlohmann::json(*e.exact) : nlohmann::json()},
                        {"leading", e.leading},
                        {"correction", e.correction},
                        {"residual", e.residual ? nlohmann::json(*e.residual) : nlohmann::json()}});
    emit({{"eps", eps}, {"limit_rate", relative_entropy(s)}, {"points", points}});
  });

  CLI::App* fit = app.add_subcommand("fit-gibbs", "recover (beta, mu) from a candidate vector");
  fit->add_option("file", file_a, "state file")->required();
  fit->callback([&] {
    const GibbsFit f = fit_gibbs(load_state_file(file_a).state);
    emit({{"status", to_string(f.status)},
          {"beta", f.beta},
          {"mu", f.mu},
          {"residual", f.residual}});
  });

  CLI::App* checkfree = app.add_subcommand("check-free", "free-state structure diagnostics");
  checkfree->add_option("file", file_a, "state file")->required();
  checkfree->callback([&] {
    const QCState s = load_state_file(file_a).state;
    const GibbsFit f = fit_gibbs(s);
    double gap = 0.0;
    for (std::size_t i = 0; i < s.dim(); ++i)
      gap = std::max(gap, std::abs(s.probs[i] - s.gibbs[i]));
    emit({{"uniform_eigensubspaces", uniform_eigensubspace_check(s)},
          {"fit_status", to_string(f.status)},
          {"beta", f.beta},
          {"mu", f.mu},
          {"residual", f.residual},
          {"matches_declared_theory", gap <= 1e-9}});
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << app.help();
    return 2;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace gpres
