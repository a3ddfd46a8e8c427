#pragma once
// Experiment runner: configuration, boundary caching, single points, sweeps,
// CSV/JSON emission, and the validation suite.

#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>

#include "tnt/exact.hpp"
#include "tnt/finetune.hpp"
#include "tnt/tailoring.hpp"

namespace tnt {

inline constexpr const char* kCodeVersion = "tnt 0.1.0";

struct ExperimentConfig {
  std::string model = "ising:h=0.5";
  double tau = 1e-4;
  std::size_t chi = 20;
  std::vector<double> betas = {32.0};
  bool finetune = true;
  FineTuneConfig ft;
  std::string boundary_cache;  // directory; empty = in-memory only
  std::string out_csv;
  std::string out_json;
  bool deterministic = false;
  std::uint64_t seed = 7;
  int jobs = 1;
  double boundary_tol = 1e-12;
  int boundary_max_iters = 60000;
};

struct RunRecord {
  std::string model;
  double h = 0.0;
  double beta = 0.0;  // realized
  std::int64_t K = 0;
  double tau = 0.0;
  std::size_t chi = 0;
  bool finetuned = false;
  double f = 0.0;
  double f_exact = 0.0;
  double delta_f = 0.0;
  double boundary_s = 0.0;
  double finetune_s = 0.0;
  double eval_s = 0.0;
  double total_s = 0.0;
  int steps = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
};

// "1,2,4" or "logspace:a:b:n" (n points from 10^a to 10^b)
std::vector<double> parse_beta_list(const std::string& s);

// Boundary MPS pairs keyed by (model, tau, chi, tol, seed); disk-backed when
// a cache directory is configured, always memoized in memory.
class BoundaryCache {
 public:
  explicit BoundaryCache(std::string dir = {}) : dir_(std::move(dir)) {}

  struct Entry {
    UniformMPS left, right;
    int iterations = 0;
    double final_delta = 0.0;
    bool from_disk = false;
  };

  Entry get(const ModelSpec& model, double tau, std::size_t chi, double tol,
            int max_iters, std::uint64_t seed);

 private:
  std::string key(const ModelSpec& model, double tau, std::size_t chi, double tol,
                  std::uint64_t seed) const;
  std::string dir_;
  std::mutex mu_;
  std::map<std::string, Entry> mem_;
};

double exact_free_energy(const ModelSpec& model, double T);  // NaN when unknown

RunRecord run_point(const ExperimentConfig& cfg, double beta_target, BoundaryCache& cache);

std::vector<RunRecord> sweep(const ExperimentConfig& cfg, BoundaryCache& cache,
                             std::ostream* progress = nullptr);

std::string csv_header();
std::string csv_row(const RunRecord& r);
std::string json_record(const RunRecord& r);  // with provenance

void write_csv(const std::string& path, const std::vector<RunRecord>& recs);
void write_json(const std::string& path, const std::vector<RunRecord>& recs);

// Full invariant suite; prints one line per check, returns the failure count.
int validate_all(std::ostream& out);

}  // namespace tnt
