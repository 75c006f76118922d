#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "ragdec/decoder.hpp"

namespace ragdec {

/// Flat "key = value" config document: one pair per line, '#' comments,
/// blank lines ignored. Keys mirror DecoderConfig fields; unknown keys are
/// rejected so typos surface immediately.
std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path);

/// Applies parsed pairs onto a config. Throws SpecError on unknown keys or
/// unparseable values.
void apply_config(DecoderConfig& config,
                  const std::map<std::string, std::string>& pairs);

std::string empty_context_mode_name(EmptyContextMode mode);
EmptyContextMode parse_empty_context_mode(const std::string& name);
std::string constraint_mode_name(ConstraintMode mode);
ConstraintMode parse_constraint_mode(const std::string& name);
std::string weight_scheme_name(WeightScheme scheme);
WeightScheme parse_weight_scheme(const std::string& name);
std::string sampling_mode_name(SamplingMode mode);
SamplingMode parse_sampling_mode(const std::string& name);

}  // namespace ragdec
