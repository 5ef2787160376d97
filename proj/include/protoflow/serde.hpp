#pragma once

#include "json.hpp"
#include "protoflow/pipeline_types.hpp"

// JSON mappings for the pipeline types. Rasters travel as base64 PNG.
namespace protoflow {

nlohmann::json to_json(const DesignInput& input);
DesignInput design_input_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const ThemeDescription& theme);
ThemeDescription theme_description_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const ThemePrompt& prompt);
ThemePrompt theme_prompt_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const ThemePackage& theme);
ThemePackage theme_package_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const SubModuleCall& call);
SubModuleCall sub_module_call_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const ComponentContent& content);
ComponentContent component_content_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const GenerationTrace& trace);
GenerationTrace generation_trace_from_json(const nlohmann::json& doc);

}  // namespace protoflow
