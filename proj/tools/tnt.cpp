// Command-line front end: boundary / tailor / sweep / exact / ed / validate.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "tnt/ed.hpp"
#include "tnt/kernels.hpp"
#include "tnt/runner.hpp"

extern "C" void openblas_set_num_threads(int);

namespace {

struct CommonOpts {
  tnt::ExperimentConfig cfg;
  std::string beta_spec = "32";
  std::string finetune = "on";
};

void add_common(CLI::App* app, CommonOpts& o) {
  app->add_option("--model", o.cfg.model, "model spec: ising:h=<h> | xy | custom:<path>");
  app->add_option("--tau", o.cfg.tau, "Trotter slice");
  app->add_option("--chi", o.cfg.chi, "boundary MPS bond dimension");
  app->add_option("--finetune", o.finetune, "on|off")->check(CLI::IsMember({"on", "off"}));
  app->add_option("--eta", o.cfg.ft.eta, "fine-tune learning rate");
  app->add_option("--max-steps", o.cfg.ft.max_steps, "fine-tune step budget");
  app->add_option("--f-tol", o.cfg.ft.f_tol, "fine-tune |df| convergence threshold");
  app->add_option("--boundary-cache", o.cfg.boundary_cache, "boundary cache directory");
  app->add_option("--boundary-tol", o.cfg.boundary_tol, "boundary Schmidt-change tolerance");
  app->add_option("--boundary-max-iters", o.cfg.boundary_max_iters, "boundary iteration cap");
  app->add_option("--out", o.cfg.out_csv, "CSV output path");
  app->add_option("--json-out", o.cfg.out_json, "JSON output path");
  app->add_option("--seed", o.cfg.seed, "random seed");
  app->add_flag("--deterministic", o.cfg.deterministic,
                "single-job, fixed-thread, bit-reproducible numeric output");
  app->add_option("--jobs", o.cfg.jobs, "concurrent grid points");
  app->add_option("--step-mode", [&o](const std::vector<std::string>& v) {
    if (v[0] == "raw") o.cfg.ft.step_mode = tnt::FineTuneConfig::StepMode::raw;
    else if (v[0] == "normalized")
      o.cfg.ft.step_mode = tnt::FineTuneConfig::StepMode::gradient_normalized;
    else return false;
    return true;
  }, "raw | normalized (gradient step mode)");
}

void finalize(CommonOpts& o) {
  o.cfg.finetune = o.finetune == "on";
  o.cfg.betas = tnt::parse_beta_list(o.beta_spec);
  if (o.cfg.deterministic) {
    o.cfg.jobs = 1;
    openblas_set_num_threads(1);
  }
}

void emit(const tnt::ExperimentConfig& cfg, const std::vector<tnt::RunRecord>& recs) {
  for (const auto& r : recs) std::cout << tnt::csv_row(r) << "\n";
  if (!cfg.out_csv.empty()) tnt::write_csv(cfg.out_csv, recs);
  if (!cfg.out_json.empty()) tnt::write_json(cfg.out_json, recs);
}

std::vector<double> parse_list(const std::string& s) { return tnt::parse_beta_list(s); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-temperature spin chains by tailoring the zero-temperature tensor network"};
  app.set_config("--config", "", "flat key=value config file");
  app.require_subcommand(1);

  bool dump_config = false;
  app.add_flag("--dump-config", dump_config, "print effective configuration and exit");

  CommonOpts ob, ot, os_;
  std::string bnd_save;

  auto* boundary = app.add_subcommand("boundary", "converge and cache the boundary MPS pair");
  add_common(boundary, ob);

  auto* tailor = app.add_subcommand("tailor", "evaluate one (model, beta) point");
  add_common(tailor, ot);
  tailor->add_option("--beta", ot.beta_spec, "target inverse temperature");

  auto* sweepc = app.add_subcommand("sweep", "run a beta grid with a shared boundary");
  add_common(sweepc, os_);
  sweepc->add_option("--beta", os_.beta_spec, "comma list or logspace:a:b:n");

  std::string ex_model = "ising:h=0.5", ex_T = "0.5", ex_out;
  auto* exact = app.add_subcommand("exact", "analytic free energies (T, f_exact)");
  exact->add_option("--model", ex_model);
  exact->add_option("--T", ex_T, "temperature list or logspace:a:b:n");
  exact->add_option("--out", ex_out, "CSV output path");

  std::string ed_model = "ising:h=0.5", ed_T = "0.5", ed_n = "8", ed_bc = "periodic", ed_out;
  auto* edc = app.add_subcommand("ed", "exact diagonalization (N, T, f, E)");
  edc->add_option("--model", ed_model);
  edc->add_option("--n", ed_n, "site counts, comma list");
  edc->add_option("--T", ed_T, "temperature list or logspace:a:b:n");
  edc->add_option("--boundary", ed_bc)->check(CLI::IsMember({"periodic", "open"}));
  edc->add_option("--out", ed_out, "CSV output path");

  auto* val = app.add_subcommand("validate", "run the full invariant suite");
  (void)val;

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(boundary)) {
      finalize(ob);
      if (dump_config) {
        std::cout << app.config_to_str(true, true);
        return 0;
      }
      tnt::BoundaryCache cache(ob.cfg.boundary_cache);
      const auto model = tnt::ModelSpec::parse(ob.cfg.model);
      const auto e = cache.get(model, ob.cfg.tau, ob.cfg.chi, ob.cfg.boundary_tol,
                               ob.cfg.boundary_max_iters, ob.cfg.seed);
      std::cout << "boundary " << (e.from_disk ? "loaded from cache" : "converged") << ": chi_L="
                << e.left.chi() << " chi_R=" << e.right.chi() << " iterations="
                << e.iterations << " final_delta=" << e.final_delta << "\n";
      return 0;
    }
    if (app.got_subcommand(tailor) || app.got_subcommand(sweepc)) {
      CommonOpts& o = app.got_subcommand(tailor) ? ot : os_;
      finalize(o);
      if (dump_config) {
        std::cout << app.config_to_str(true, true);
        return 0;
      }
      tnt::BoundaryCache cache(o.cfg.boundary_cache);
      std::cout << tnt::csv_header() << "\n";
      auto recs = tnt::sweep(o.cfg, cache);
      emit(o.cfg, recs);
      for (const auto& r : recs)
        if (r.failed) {
          std::cerr << "point beta=" << r.beta << " failed: " << r.error << "\n";
          return 2;
        }
      return 0;
    }
    if (app.got_subcommand(exact)) {
      const auto model = tnt::ModelSpec::parse(ex_model);
      std::ostringstream csv;
      csv << "T,f_exact\n";
      for (double T : parse_list(ex_T)) {
        char buf[80];
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", T,
                      tnt::exact_free_energy(model, T));
        csv << buf;
      }
      std::cout << csv.str();
      if (!ex_out.empty()) std::ofstream(ex_out, std::ios::trunc) << csv.str();
      return 0;
    }
    if (app.got_subcommand(edc)) {
      const auto model = tnt::ModelSpec::parse(ed_model);
      const auto bc = ed_bc == "periodic" ? tnt::Boundary::periodic : tnt::Boundary::open;
      std::ostringstream csv;
      csv << "N,T,f,E\n";
      for (double nd : parse_list(ed_n)) {
        const int n = static_cast<int>(nd);
        const auto chain = tnt::dense_hamiltonian(model, n, bc);
        for (double T : parse_list(ed_T)) {
          char buf[100];
          std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", n, T,
                        tnt::free_energy_ed(chain, T), tnt::thermal_energy_ed(chain, T));
          csv << buf;
        }
      }
      std::cout << csv.str();
      if (!ed_out.empty()) std::ofstream(ed_out, std::ios::trunc) << csv.str();
      return 0;
    }
    if (app.got_subcommand(val)) {
      const int failures = tnt::validate_all(std::cout);
      std::cout << (failures == 0 ? "ALL CHECKS PASSED" : "FAILURES: " + std::to_string(failures))
                << "\n";
      return failures == 0 ? 0 : 1;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
