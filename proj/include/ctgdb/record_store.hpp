#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ctgdb/registry.hpp"

namespace ctgdb {

// Intermediate study store: one JSON object per line, keys in a fixed
// order, so equal record streams serialize to equal bytes.

std::string serialize_study(const StudyRecord& study);
StudyRecord deserialize_study(std::string_view line);

std::string serialize_studies(std::span<const StudyRecord> studies);
std::vector<StudyRecord> deserialize_studies(std::string_view text);

void write_study_store(const std::filesystem::path& path, std::span<const StudyRecord> studies);
std::vector<StudyRecord> read_study_store(const std::filesystem::path& path);

}  // namespace ctgdb
