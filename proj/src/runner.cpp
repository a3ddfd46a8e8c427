#include "tnt/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tnt/ed.hpp"
#include "tnt/kernels.hpp"

namespace tnt {

namespace {

using json = nlohmann::json;
using clock_t_ = std::chrono::steady_clock;

double seconds_since(clock_t_::time_point t0) {
  return std::chrono::duration<double>(clock_t_::now() - t0).count();
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<double> parse_beta_list(const std::string& s) {
  std::vector<double> out;
  if (s.rfind("logspace:", 0) == 0) {
    std::istringstream is(s.substr(9));
    std::string a, b, n;
    if (!std::getline(is, a, ':') || !std::getline(is, b, ':') || !std::getline(is, n))
      throw Error("bad logspace spec: " + s);
    const double lo = std::stod(a), hi = std::stod(b);
    const int np = std::stoi(n);
    if (np < 1) throw Error("logspace needs >= 1 points");
    for (int i = 0; i < np; ++i) {
      const double t = np == 1 ? 0.0 : static_cast<double>(i) / (np - 1);
      out.push_back(std::pow(10.0, lo + t * (hi - lo)));
    }
    return out;
  }
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  if (out.empty()) throw Error("empty beta grid");
  return out;
}

std::string BoundaryCache::key(const ModelSpec& model, double tau, std::size_t chi,
                               double tol, std::uint64_t seed) const {
  std::ostringstream os;
  os << model.to_string() << "|tau=" << fmt17(tau) << "|chi=" << chi
     << "|tol=" << fmt17(tol) << "|seed=" << seed;
  return os.str();
}

BoundaryCache::Entry BoundaryCache::get(const ModelSpec& model, double tau,
                                        std::size_t chi, double tol, int max_iters,
                                        std::uint64_t seed) {
  const std::string k = key(model, tau, chi, tol, seed);
  {
    std::scoped_lock lock(mu_);
    auto it = mem_.find(k);
    if (it != mem_.end()) return it->second;
  }
  namespace fs = std::filesystem;
  std::string file;
  if (!dir_.empty()) {
    fs::create_directories(dir_);
    file = (fs::path(dir_) / (std::to_string(std::hash<std::string>{}(k)) + ".bnd")).string();
    std::ifstream in(file, std::ios::binary);
    if (in) {
      std::uint32_t klen = 0;
      in.read(reinterpret_cast<char*>(&klen), 4);
      std::string stored(klen, '\0');
      in.read(stored.data(), klen);
      if (in && stored == k) {
        Entry e;
        e.left = UniformMPS{DenseTensor::load(in), Side::L};
        e.right = UniformMPS{DenseTensor::load(in), Side::R};
        e.from_disk = true;
        std::scoped_lock lock(mu_);
        mem_[k] = e;
        return e;
      }
    }
  }
  ThetaTensor theta = build_theta(model, tau);
  PowerOptions opts;
  opts.seed = seed;
  PowerResult pr = power_converge(theta, chi, tol, max_iters, opts);
  Entry e{pr.left, pr.right, std::max(pr.iterations_left, pr.iterations_right),
          std::max(pr.final_delta_left, pr.final_delta_right), false};
  if (!file.empty()) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    const std::uint32_t klen = static_cast<std::uint32_t>(k.size());
    out.write(reinterpret_cast<const char*>(&klen), 4);
    out.write(k.data(), klen);
    e.left.tensor.save(out);
    e.right.tensor.save(out);
  }
  std::scoped_lock lock(mu_);
  mem_[k] = e;
  return e;
}

double exact_free_energy(const ModelSpec& model, double T) {
  switch (model.kind) {
    case ModelSpec::Kind::TransverseIsing: return ising_free_energy(model.h, T);
    case ModelSpec::Kind::XY: return xy_free_energy(T);
    case ModelSpec::Kind::CustomTwoSite:
      if (model.custom && model.custom->max_abs() == 0.0)
        return -T * std::log(2.0);  // free spin-1/2
      return std::numeric_limits<double>::quiet_NaN();
  }
  return std::numeric_limits<double>::quiet_NaN();
}

RunRecord run_point(const ExperimentConfig& cfg, double beta_target, BoundaryCache& cache) {
  RunRecord rec;
  rec.model = cfg.model;
  rec.tau = cfg.tau;
  rec.chi = cfg.chi;
  rec.finetuned = cfg.finetune;
  rec.seed = cfg.seed;
  const auto t0 = clock_t_::now();
  try {
    const ModelSpec model = ModelSpec::parse(cfg.model);
    rec.h = model.kind == ModelSpec::Kind::TransverseIsing ? model.h : 0.0;

    const auto tb0 = clock_t_::now();
    auto bnd = cache.get(model, cfg.tau, cfg.chi, cfg.boundary_tol,
                         cfg.boundary_max_iters, cfg.seed);
    rec.boundary_s = seconds_since(tb0);

    ThetaTensor theta = build_theta(model, cfg.tau);
    TailoredEnsemble ens = scissor_and_stitch(bnd.left, bnd.right, theta,
                                              beta_target, cfg.tau);
    rec.beta = ens.beta;
    rec.K = ens.K;

    if (cfg.finetune) {
      const auto tf0 = clock_t_::now();
      auto [opt, trace] = finetune_loop(ens, cfg.ft);
      ens = std::move(opt);
      rec.finetune_s = seconds_since(tf0);
      rec.steps = static_cast<int>(trace.steps.size()) - 1;
    }

    const auto te0 = clock_t_::now();
    const FreeEnergyReport fr = free_energy(ens);
    rec.eval_s = seconds_since(te0);
    rec.f = fr.f;
    rec.f_exact = exact_free_energy(model, 1.0 / rec.beta);
    rec.delta_f = std::isnan(rec.f_exact) ? std::numeric_limits<double>::quiet_NaN()
                                          : tnt::delta_f(rec.f, rec.f_exact);
  } catch (const std::exception& ex) {
    rec.failed = true;
    rec.error = ex.what();
  }
  rec.total_s = seconds_since(t0);
  return rec;
}

std::vector<RunRecord> sweep(const ExperimentConfig& cfg, BoundaryCache& cache,
                             std::ostream* progress) {
  // warm the boundary once per (model, tau, chi): this is what keeps the
  // per-beta cost flat across the grid
  const ModelSpec model = ModelSpec::parse(cfg.model);
  cache.get(model, cfg.tau, cfg.chi, cfg.boundary_tol, cfg.boundary_max_iters, cfg.seed);

  std::vector<RunRecord> recs(cfg.betas.size());
  const int jobs = cfg.deterministic ? 1 : std::max(1, cfg.jobs);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < cfg.betas.size(); ++i) {
      recs[i] = run_point(cfg, cfg.betas[i], cache);
      if (progress)
        (*progress) << "beta=" << cfg.betas[i] << " f=" << fmt17(recs[i].f)
                    << " delta_f=" << recs[i].delta_f
                    << (recs[i].failed ? " FAILED: " + recs[i].error : "") << "\n";
    }
  } else {
    std::vector<std::future<RunRecord>> futs;
    futs.reserve(cfg.betas.size());
    std::size_t next = 0;
    std::vector<std::size_t> idx;
    while (next < cfg.betas.size() || !futs.empty()) {
      while (next < cfg.betas.size() && futs.size() < static_cast<std::size_t>(jobs)) {
        futs.push_back(std::async(std::launch::async, run_point, std::cref(cfg),
                                  cfg.betas[next], std::ref(cache)));
        idx.push_back(next);
        ++next;
      }
      recs[idx.front()] = futs.front().get();
      futs.erase(futs.begin());
      idx.erase(idx.begin());
    }
  }
  return recs;
}

std::string csv_header() {
  return "model,h,beta,K,tau,chi,finetuned,f,f_exact,delta_f,boundary_s,finetune_s,"
         "eval_s,total_s,steps,seed";
}

std::string csv_row(const RunRecord& r) {
  std::ostringstream os;
  os << r.model << ',' << fmt17(r.h) << ',' << fmt17(r.beta) << ',' << r.K << ','
     << fmt17(r.tau) << ',' << r.chi << ',' << (r.finetuned ? 1 : 0) << ','
     << fmt17(r.f) << ',' << fmt17(r.f_exact) << ',' << fmt17(r.delta_f) << ','
     << fmt17(r.boundary_s) << ',' << fmt17(r.finetune_s) << ',' << fmt17(r.eval_s)
     << ',' << fmt17(r.total_s) << ',' << r.steps << ',' << r.seed;
  return os.str();
}

std::string json_record(const RunRecord& r) {
  json j{{"model", r.model},
         {"h", r.h},
         {"beta", r.beta},
         {"K", r.K},
         {"tau", r.tau},
         {"chi", r.chi},
         {"finetuned", r.finetuned},
         {"f", r.f},
         {"f_exact", r.f_exact},
         {"delta_f", r.delta_f},
         {"timings", {{"boundary_s", r.boundary_s},
                      {"finetune_s", r.finetune_s},
                      {"eval_s", r.eval_s},
                      {"total_s", r.total_s}}},
         {"steps", r.steps},
         {"seed", r.seed},
         {"code_version", kCodeVersion}};
  if (r.failed) j["error"] = r.error;
  return j.dump();
}

void write_csv(const std::string& path, const std::vector<RunRecord>& recs) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << csv_header() << "\n";
  for (const auto& r : recs) out << csv_row(r) << "\n";
}

void write_json(const std::string& path, const std::vector<RunRecord>& recs) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  json arr = json::array();
  for (const auto& r : recs) arr.push_back(json::parse(json_record(r)));
  out << arr.dump(2) << "\n";
}

namespace {

struct Check {
  std::string name;
  std::function<bool(std::string&)> run;
};

bool close(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

}  // namespace

int validate_all(std::ostream& out) {
  std::vector<Check> checks;

  checks.push_back({"contract matches three-loop reference", [](std::string& msg) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    DenseTensor a({3, 4, 5}), b({5, 4, 2});
    for (std::size_t i = 0; i < a.size(); ++i) a.at(i) = u(rng);
    for (std::size_t i = 0; i < b.size(); ++i) b.at(i) = u(rng);
    DenseTensor c = contract(a, b, {{2, 0}, {1, 1}});
    double dev = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 2; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < 5; ++k)
          for (std::size_t l = 0; l < 4; ++l) s += a(i, l, k) * b(k, l, j);
        dev = std::max(dev, std::fabs(c(i, j) - s));
      }
    msg = "max dev " + std::to_string(dev);
    return dev <= 1e-12;
  }});

  checks.push_back({"svd reconstructs at full rank", [](std::string& msg) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    DenseTensor t({4, 6});
    for (std::size_t i = 0; i < t.size(); ++i) t.at(i) = u(rng);
    auto svd = svd_truncated(t, {0}, {1}, 6, 0.0);
    double dev = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 6; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < svd.singular_values.size(); ++k)
          s += svd.left_factor(i, k) * svd.singular_values[k] * svd.right_factor(k, j);
        dev = std::max(dev, std::fabs(s - t(i, j)));
      }
    msg = "recon dev " + std::to_string(dev);
    return dev <= 1e-12;
  }});

  checks.push_back({"theta row matches dense Trotter layer", [](std::string& msg) {
    double worst = 0.0;
    for (const auto& model : {ModelSpec::ising(0.5), ModelSpec::xy()})
      for (double tau : {1e-2, 1e-3, 1e-4})
        worst = std::max(worst, validate_theta_row(build_theta(model, tau), 4));
    std::ostringstream os;
    os << "max rel dev " << worst;
    msg = os.str();
    return worst <= 1e-12;
  }});

  checks.push_back({"analytic gradient matches finite differences", [](std::string& msg) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.2, 1.0);
    ThetaTensor th = build_theta(ModelSpec::ising(0.5), 0.05);
    const std::size_t r = th.bond();
    UniformMPS A{DenseTensor({3, r, 3}), Side::L}, B{DenseTensor({3, r, 3}), Side::R};
    for (std::size_t i = 0; i < A.tensor.size(); ++i) A.tensor.at(i) = u(rng);
    for (std::size_t i = 0; i < B.tensor.size(); ++i) B.tensor.at(i) = u(rng);
    TailoredEnsemble e = scissor_and_stitch(A, B, th, 7 * 0.05, 0.05);
    auto ga = gradient(e, FineTuneConfig::GradMode::analytic);
    auto gf = gradient(e, FineTuneConfig::GradMode::finite_difference_debug, 1e-6);
    double rel = 0.0;
    for (std::size_t i = 0; i < ga.dA.size(); ++i)
      if (std::fabs(gf.dA.at(i)) > 1e-10)
        rel = std::max(rel, std::fabs(ga.dA.at(i) - gf.dA.at(i)) / std::fabs(gf.dA.at(i)));
    for (std::size_t i = 0; i < ga.dB.size(); ++i)
      if (std::fabs(gf.dB.at(i)) > 1e-10)
        rel = std::max(rel, std::fabs(ga.dB.at(i) - gf.dB.at(i)) / std::fabs(gf.dB.at(i)));
    std::ostringstream os;
    os << "max rel err " << rel;
    msg = os.str();
    return rel <= 1e-6;
  }});

  checks.push_back({"ED cross-validates the analytic baselines", [](std::string& msg) {
    std::ostringstream os;
    for (const auto& model : {ModelSpec::ising(0.5), ModelSpec::xy()}) {
      const double fex = exact_free_energy(model, 0.5);
      double prev = 1e9;
      for (int n : {8, 10, 12}) {
        const auto chain = dense_hamiltonian(model, n, Boundary::periodic);
        const double dev = std::fabs(free_energy_ed(chain, 0.5) - fex);
        if (dev >= prev) {
          msg = "finite-size deviation not decreasing at N=" + std::to_string(n);
          return false;
        }
        prev = dev;
      }
      os << model.to_string() << " dev(N=12) " << prev << "  ";
    }
    msg = os.str();
    return true;
  }});

  checks.push_back({"zero Hamiltonian gives f = -T ln 2", [](std::string& msg) {
    DenseTensor zero({4, 4});
    ModelSpec model = ModelSpec::custom_two_site(zero);
    ThetaTensor th = build_theta(model, 0.01);
    UniformMPS A{DenseTensor({1, 1, 1}, {1.0}), Side::L};
    UniformMPS B{DenseTensor({1, 1, 1}, {1.0}), Side::R};
    TailoredEnsemble e = scissor_and_stitch(A, B, th, 5.0, 0.01);
    const double f = free_energy(e).f;
    const double ref = -std::log(2.0) / e.beta;
    msg = "f " + fmt17(f) + " vs " + fmt17(ref);
    return close(f, ref, 1e-12);
  }});

  int failures = 0;
  for (auto& c : checks) {
    std::string msg;
    bool ok = false;
    try {
      ok = c.run(msg);
    } catch (const std::exception& ex) {
      msg = std::string("exception: ") + ex.what();
    }
    out << (ok ? "PASS" : "FAIL") << "  " << c.name << (msg.empty() ? "" : "  [" + msg + "]")
        << "\n";
    if (!ok) ++failures;
  }
  return failures;
}

}  // namespace tnt
