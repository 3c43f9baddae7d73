#pragma once

// Internal: JSON (de)serialization of networks shared by the single-model
// and ensemble file formats.

#include <string>

#include "json.hpp"
#include "selfieboost/nnet.hpp"

namespace selfieboost::detail {

nlohmann::json model_object(const FeedForwardNet& net);

/// Parses a model object (without the format_version check). `where`
/// prefixes error messages, e.g. "members[2]".
FeedForwardNet model_from_object(const nlohmann::json& obj, const std::string& where);

void check_format_version(const nlohmann::json& doc, int expected);

nlohmann::json parse_json_text(std::string_view text, const std::string& what);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace selfieboost::detail
