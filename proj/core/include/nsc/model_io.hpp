#pragma once

#include <string>

#include "nsc/basis.hpp"
#include "nsc/nuisance.hpp"
#include "nsc/odds_ratio.hpp"

namespace nsc {

/// JSON text for fitted models. Every basis is a list of term objects
///   {"l": [..], "l_complement": [..], "x": [..], "x_complement": [..], "transform": "tag"}
/// with 1-based coordinates and empty fields omitted ({} is the constant),
/// plus optional "l0" and the "coef" array. A top-level "kind" field names
/// the model ("selection_model" or "pattern_mixture").
///
/// Bases with transforms need the same registry when parsed back; the
/// registry must outlive the returned model.
std::string serialize(const SelectionModel& model);
std::string serialize(const PatternMixtureModel& model, int k);

SelectionModel parse_selection_model(const std::string& text, const TransformRegistry* registry = nullptr);
PatternMixtureModel parse_pattern_mixture(const std::string& text, const TransformRegistry* registry = nullptr);

}  // namespace nsc
