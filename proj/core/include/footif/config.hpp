#pragma once

#include <filesystem>
#include <iosfwd>

#include "footif/device_model.hpp"
#include "footif/signal_pipeline.hpp"
#include "footif/subject_mapping.hpp"
#include "footif/synthetic_subject.hpp"

namespace footif {

/// Everything a CLI run can be configured with. Defaults match
/// config/default.conf.
struct RunConfig {
  GeometryParams geometry{};
  PipelineOptions pipeline{};
  SparcOptions sparc{};
  MappingOptions mapping{};
  CohortSpec cohort{};
  std::filesystem::path output_dir;
};

/// INI-style `key = value` document with sections; `#` and `;` start
/// comments. Unknown sections or keys are rejected with Error(ParseError).
/// A `[run] geometry_file` is resolved against `base_dir`, must exist, and is
/// read before the remaining keys so they can override it.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});

/// Throws Error(IoError) if the file is missing.
RunConfig load_config(const std::filesystem::path& path);

}  // namespace footif
