#pragma once

#include "agpnav/bench.hpp"

#include <filesystem>
#include <string>

namespace agpnav {

/// Tunables of every subcommand, grouped as in the config document:
/// {"sim": {...}, "nav": {...}, "train": {...}, "bench": {...}}.
/// Keys match the field names; absent keys keep the base value.
struct AppConfig {
  SimConfig sim;
  NavConfig nav;
  TrainConfig train;
  BenchConfig bench;
};

/// Throws ParseError on malformed documents and unknown keys.
AppConfig config_from_json(const std::string& text, AppConfig base = {});
AppConfig load_config(const std::filesystem::path& path, AppConfig base = {});

}  // namespace agpnav
