#pragma once

#include <string>
#include <vector>

#include "glsge/synth.hpp"
#include "glsge/trainer.hpp"

// Plain-text `key = value` configuration.  Trainer keys are bare (`lambda`,
// `n_outer`, ...); generator keys carry a `synth.` prefix.  Unknown or repeated keys
// are errors; absent keys keep their defaults.
namespace glsge::config {

struct Config {
    trainer::TrainerConfig trainer;
    synth::SynthConfig synth;
};

/// Every recognised key, in the order used by to_text.
[[nodiscard]] const std::vector<std::string> &known_keys();

/// Parses config text, then applies `key=value` overrides, which win over the text.
/// The same override key given twice throws Config/"duplicate_override".
[[nodiscard]] Config parse_config_text(const std::string &text, const std::vector<std::string> &overrides = {});
[[nodiscard]] Config parse_config(const std::string &path, const std::vector<std::string> &overrides = {});

/// All keys with their resolved values; parse_config_text(to_text(c)) reproduces c.
[[nodiscard]] std::string to_text(const Config &c);

}  // namespace glsge::config
