#include "pcv/model.hpp"

namespace pcv {

std::string score_name(ScoreKind s) {
  switch (s) {
    case ScoreKind::LogS: return "logs";
    case ScoreKind::HS: return "hs";
    case ScoreKind::DSS: return "dss";
  }
  return "logs";
}

ScoreKind score_from_name(const std::string& name) {
  if (name == "logs" || name == "LogS") return ScoreKind::LogS;
  if (name == "hs" || name == "HS") return ScoreKind::HS;
  if (name == "dss" || name == "DSS") return ScoreKind::DSS;
  throw invalid_input("unknown score '" + name + "' (expected logs|hs|dss)");
}

void Model::check_score_support(ScoreKind kind) const {
  if (kind == ScoreKind::HS && !supports_pred_derivs())
    throw unsupported_score("score hs is unsupported: model " + name() +
                            " lacks predictive derivatives");
  if (kind == ScoreKind::DSS && !supports_pred_sample())
    throw unsupported_score("score dss is unsupported: model " + name() +
                            " lacks a predictive sampler");
}

}  // namespace pcv
