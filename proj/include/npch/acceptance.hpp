#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "npch/cylinder.hpp"
#include "npch/io.hpp"

namespace npch {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  double seconds = 0.0;
  ojson detail = ojson::object();
};

inline constexpr int kCriterionCount = 12;

class AcceptanceSuite {
 public:
  explicit AcceptanceSuite(std::uint64_t seed = 20240611, std::string scratch_dir = {});

  CriterionResult run(int id);
  std::vector<CriterionResult> run_all();

  // Every energy profile produced by a solver run so far, labelled.
  const std::vector<std::pair<std::string, EnergyProfile>>& profiles() const { return profiles_; }

 private:
  ojson npc_kernel(bool& pass);
  ojson metric_anchor(bool& pass);
  ojson translation_law(bool& pass);
  ojson parabolic_decay(bool& pass);
  ojson energy_slope(bool& pass);
  ojson lower_bound(bool& pass);
  ojson theta_energy(bool& pass);
  ojson uniqueness(bool& pass);
  ojson torus_maps(bool& pass);
  ojson bochner(bool& pass);
  ojson calculus(bool& pass);
  ojson determinism(bool& pass);

  const SolveResult<HyperbolicPlane>& hyperbolic_solve();
  void record(const std::string& label, const std::vector<EnergyProfile>& levels);

  std::uint64_t seed_;
  std::string scratch_;
  std::optional<SolveResult<HyperbolicPlane>> hyperbolic_;
  double hyperbolic_seconds_ = 0.0;
  std::optional<ojson> uniqueness_;
  std::vector<std::pair<std::string, EnergyProfile>> profiles_;
};

std::string criterion_title(int id);
std::string format_result_line(const CriterionResult& r);

// Command-line driver: [--criterion N] [--seed S] [--json FILE]. Prints one
// line per criterion and returns 0 when all pass, 1 otherwise, 2 on usage.
int acceptance_main(const std::vector<std::string>& args);

}  // namespace npch
