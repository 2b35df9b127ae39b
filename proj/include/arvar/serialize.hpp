#pragma once

// Versioned JSON documents for fitted models. Doubles are written with
// round-trip precision, so a reloaded model predicts identically.

#include <string>

#include "arvar/meanfn.hpp"
#include "arvar/varmodel.hpp"

namespace arvar {

inline constexpr int kModelFormatVersion = 1;

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string model_to_json(const VarianceModel& model);
/// Throws FormatError on malformed documents, unknown families or versions.
VarianceModel model_from_json(const std::string& text);

std::string gp_to_json(const GpModel& model);
GpModel gp_from_json(const std::string& text);

std::string family_name(const VarianceModel& model);

}  // namespace arvar
