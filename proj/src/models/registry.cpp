#include "pcv/models/registry.hpp"

#include <fstream>

#include "json.hpp"
#include "pcv/errors.hpp"
#include "pcv/folds.hpp"
#include "pcv/models/grouped_regression.hpp"
#include "pcv/models/radon.hpp"
#include "pcv/models/rat_growth.hpp"
#include "pcv/models/seasonal_ar.hpp"

namespace pcv {

namespace {

FoldAssignment make_scheme(const ConfigMap& cfg, const Dataset& data) {
  const std::string kind = cfg.get_str("scheme.kind", "logo");
  if (kind == "loo") return make_loo_scheme(data);
  if (kind == "logo") return make_logo_scheme(data);
  if (kind == "kfold")
    return make_kfold_scheme(data, static_cast<int>(cfg.require_long("scheme.k")),
                             cfg.get_u64("scheme.seed", 1));
  if (kind == "time-blocks")
    return make_time_block_scheme(data,
                                  static_cast<int>(cfg.require_long("scheme.k")));
  throw invalid_input("unknown scheme.kind '" + kind + "'");
}

RhoTransform rho_transform_of(const ConfigMap& cfg) {
  const std::string t = cfg.get_str("model.rho_transform", "half-open");
  if (t == "half-open") return RhoTransform::HalfOpen;
  if (t == "symmetric") return RhoTransform::Symmetric;
  throw invalid_input("model.rho_transform must be half-open or symmetric");
}

}  // namespace

BuiltModels build_models_from_config(const ConfigMap& cfg) {
  ColumnRoles roles;
  roles.response = cfg.get_str("data.response", "y");
  if (cfg.has("data.covariates")) roles.covariates = cfg.get_list("data.covariates");
  roles.group = cfg.get_str("data.group", "");
  roles.time = cfg.get_str("data.time", "");
  const Dataset data = read_csv(cfg.get_str("data.path"), roles);
  const FoldAssignment folds = make_scheme(cfg, data);

  const std::string family = cfg.get_str("model.family");
  const std::string name_a = cfg.get_str("model.name_a", "M_A");
  const std::string name_b = cfg.get_str("model.name_b", "M_B");
  const bool pair = cfg.has("model.mask_b") || cfg.has("model.slope_b") ||
                    cfg.has("model.floor_b") || cfg.has("model.q_b");

  BuiltModels out;
  if (family == "grouped-reg") {
    auto mask = [&](const std::string& key) {
      return cfg.has(key) ? cfg.get_int_list(key) : std::vector<int>{};
    };
    out.models.push_back(std::make_unique<GroupedRegressionModel>(
        name_a, data, folds, mask("model.mask_a")));
    if (pair)
      out.models.push_back(std::make_unique<GroupedRegressionModel>(
          name_b, data, folds, mask("model.mask_b")));
  } else if (family == "rat-growth") {
    auto slope = [&](const std::string& key, const std::string& fallback) {
      const std::string v = cfg.get_str(key, fallback);
      if (v == "per-subject") return true;
      if (v == "shared") return false;
      throw invalid_input(key + " must be per-subject or shared");
    };
    out.models.push_back(std::make_unique<RatGrowthModel>(
        name_a, data, folds, slope("model.slope_a", "per-subject")));
    if (pair)
      out.models.push_back(std::make_unique<RatGrowthModel>(
          name_b, data, folds, slope("model.slope_b", "shared")));
  } else if (family == "radon") {
    out.models.push_back(std::make_unique<RadonStyleModel>(
        name_a, data, folds, cfg.get_bool("model.floor_a", true)));
    if (pair)
      out.models.push_back(std::make_unique<RadonStyleModel>(
          name_b, data, folds, cfg.get_bool("model.floor_b", false)));
  } else if (family == "seasonal-ar") {
    const int p = static_cast<int>(cfg.get_long("model.p", 1));
    const RhoTransform tf = rho_transform_of(cfg);
    out.models.push_back(std::make_unique<SeasonalARModel>(
        name_a, data, folds, p, static_cast<int>(cfg.get_long("model.q_a", 11)),
        tf));
    if (pair)
      out.models.push_back(std::make_unique<SeasonalARModel>(
          name_b, data, folds, p,
          static_cast<int>(cfg.get_long("model.q_b", 0)), tf));
  } else {
    throw invalid_input("unknown model.family '" + family + "'");
  }
  return out;
}

std::string run_simulator(const std::string& family, const ConfigMap& args,
                          std::uint64_t seed, const std::string& out_dir) {
  using nlohmann::json;
  json truth;
  Dataset data;
  std::vector<std::string> cov_names;

  if (family == "grouped-reg") {
    GroupedSimOptions opt;
    opt.groups = static_cast<int>(args.get_long("J", 50));
    opt.per_group = static_cast<int>(args.get_long("Nj", 5));
    opt.covariates = static_cast<int>(args.get_long("P", 4));
    opt.min_omitted_beta = args.get_double("min_omitted_beta", 0.0);
    auto sim = simulate_grouped_regression(opt, seed);
    data = std::move(sim.data);
    for (int p = 0; p < opt.covariates; ++p)
      cov_names.push_back("x" + std::to_string(p + 1));
    truth = {{"alpha", sim.alpha},       {"beta", sim.beta},
             {"mu_alpha", sim.mu_alpha}, {"sigma_alpha", sim.sigma_alpha},
             {"sigma_y", sim.sigma_y},   {"seed", seed}};
  } else if (family == "rat-growth") {
    auto sim = simulate_rat_growth(static_cast<int>(args.get_long("J", 30)), seed);
    data = std::move(sim.data);
    cov_names = {"t"};
    truth = {{"alpha", sim.alpha},         {"beta", sim.beta},
             {"mu_alpha", sim.mu_alpha},   {"mu_beta", sim.mu_beta},
             {"sigma_alpha", sim.sigma_alpha},
             {"sigma_beta", sim.sigma_beta},
             {"sigma_y", sim.sigma_y},     {"seed", seed}};
  } else if (family == "radon") {
    auto sim = simulate_radon_style(static_cast<int>(args.get_long("houses", 600)),
                                    static_cast<int>(args.get_long("counties", 30)),
                                    seed);
    data = std::move(sim.data);
    cov_names = {"floor"};
    truth = {{"alpha", sim.alpha},
             {"beta", sim.beta},
             {"mu_alpha", sim.mu_alpha},
             {"sigma_alpha2", sim.sigma_alpha2},
             {"sigma_y2", sim.sigma_y2},
             {"seed", seed}};
  } else if (family == "seasonal-ar") {
    SeasonalSimOptions opt;
    opt.months = args.get_long("T", 432);
    opt.ar_order = static_cast<int>(args.get_long("p", 1));
    opt.dummies = static_cast<int>(args.get_long("q", 11));
    opt.rho = args.get_double("rho", 0.6);
    opt.seasonal_amp = args.get_double("amp", 1.0);
    opt.sigma = args.get_double("sigma", 1.0);
    auto sim = simulate_seasonal_ar(opt, seed);
    data = std::move(sim.data);
    for (int i = 0; i < opt.ar_order; ++i)
      cov_names.push_back("lag" + std::to_string(i + 1));
    for (int j = 1; j <= opt.dummies; ++j)
      cov_names.push_back("d" + std::to_string(j));
    truth = {{"rho", sim.rho}, {"beta", sim.beta}, {"sigma", sim.sigma},
             {"seed", seed}};
  } else {
    throw invalid_input("unknown simulator family '" + family + "'");
  }

  const std::string csv_path = out_dir + "/" + family + ".csv";
  write_csv(csv_path, data, cov_names);
  std::ofstream out(out_dir + "/" + family + "_truth.json");
  if (!out) throw invalid_input("cannot write truth sidecar in " + out_dir);
  out << truth.dump(2) << '\n';
  return csv_path;
}

}  // namespace pcv
