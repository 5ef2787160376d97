#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace protoflow {

/// Minimal DOM produced by the expat-backed reader. Character data is
/// concatenated into `text`; mixed-content ordering is not preserved.
struct XmlElement {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::string text;
    std::vector<XmlElement> children;

    const std::string* attribute(std::string_view key) const;
    std::string attribute_or(std::string_view key, std::string fallback) const;
};

/// Parses a document with exactly one root element. Throws ValidationError
/// carrying the expat message and line on malformed input.
XmlElement parse_xml(std::string_view document);

bool is_well_formed_xml(std::string_view document, std::string* error = nullptr);

/// Escapes &, <, >, " and ' for use in text nodes and attribute values.
std::string xml_escape(std::string_view text);

}  // namespace protoflow
