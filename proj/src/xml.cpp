#include "protoflow/xml.hpp"

#include <expat.h>

#include <memory>

#include "protoflow/error.hpp"

namespace protoflow {

const std::string* XmlElement::attribute(std::string_view key) const {
    for (const auto& [k, v] : attributes)
        if (k == key) return &v;
    return nullptr;
}

std::string XmlElement::attribute_or(std::string_view key, std::string fallback) const {
    const auto* value = attribute(key);
    return value ? *value : std::move(fallback);
}

namespace {

struct Builder {
    XmlElement root;
    std::vector<XmlElement*> stack;
    int roots = 0;
};

void on_start(void* user, const XML_Char* name, const XML_Char** attrs) {
    auto* b = static_cast<Builder*>(user);
    XmlElement* node = nullptr;
    if (b->stack.empty()) {
        ++b->roots;
        node = &b->root;
    } else {
        b->stack.back()->children.emplace_back();
        node = &b->stack.back()->children.back();
    }
    node->name = name;
    for (int i = 0; attrs[i]; i += 2) node->attributes.emplace_back(attrs[i], attrs[i + 1]);
    b->stack.push_back(node);
}

void on_end(void* user, const XML_Char*) { static_cast<Builder*>(user)->stack.pop_back(); }

void on_text(void* user, const XML_Char* s, int len) {
    auto* b = static_cast<Builder*>(user);
    if (!b->stack.empty()) b->stack.back()->text.append(s, static_cast<std::size_t>(len));
}

}  // namespace

XmlElement parse_xml(std::string_view document) {
    std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser(XML_ParserCreate("UTF-8"), &XML_ParserFree);
    if (!parser) throw Error("XML_ParserCreate failed");
    Builder builder;
    XML_SetUserData(parser.get(), &builder);
    XML_SetElementHandler(parser.get(), on_start, on_end);
    XML_SetCharacterDataHandler(parser.get(), on_text);
    if (XML_Parse(parser.get(), document.data(), static_cast<int>(document.size()), XML_TRUE) == XML_STATUS_ERROR) {
        throw ValidationError("malformed XML at line " +
                              std::to_string(XML_GetCurrentLineNumber(parser.get())) + ": " +
                              XML_ErrorString(XML_GetErrorCode(parser.get())));
    }
    if (builder.roots != 1) throw ValidationError("XML document must have exactly one root element");
    return std::move(builder.root);
}

bool is_well_formed_xml(std::string_view document, std::string* error) {
    try {
        parse_xml(document);
        return true;
    } catch (const ValidationError& e) {
        if (error) *error = e.what();
        return false;
    }
}

std::string xml_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace protoflow
