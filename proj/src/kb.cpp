#include "protoflow/kb.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <regex>
#include <sstream>

#include "protoflow/error.hpp"
#include "protoflow/xml.hpp"

namespace protoflow {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 13> kTypeLabels{
    "Text", "TextButton", "Icon", "Image", "BackgroundImage", "Toolbar", "ListItem",
    "Input", "Card", "WebView", "Checkbox", "RadioButton", "Slider",
};

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

std::string record_prefix(std::size_t index) { return "records[" + std::to_string(index) + "]"; }

// Pulls a required string member, naming the field on failure.
std::string require_string(const json& obj, const char* key, const std::string& where, const std::string& label) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_string())
        throw ValidationError("missing or non-string field '" + std::string(key) + "' at " + label,
                              where + "." + key);
    return it->get<std::string>();
}

int require_int(const json& value, const std::string& field) {
    if (!value.is_number_integer()) throw ValidationError("expected integer at " + field, field);
    return value.get<int>();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open " + path.string());
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        lines.push_back(std::move(line));
    }
    return lines;
}

std::vector<std::filesystem::path> record_files(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    if (!fs::exists(path)) throw NotFoundError("no such file or directory: " + path.string());
    if (!fs::is_directory(path)) return {path};
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path))
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    return files;
}

}  // namespace

std::string_view to_string(ComponentType type) { return kTypeLabels[static_cast<std::size_t>(type)]; }

ComponentType parse_component_type(std::string_view label) {
    for (std::size_t i = 0; i < kTypeLabels.size(); ++i)
        if (iequals(label, kTypeLabels[i])) return kAllComponentTypes[i];
    throw ValidationError("unknown component type '" + std::string(label) + "'");
}

void validate_layout(const Layout& layout) {
    if (layout.canvas.width < 1 || layout.canvas.height < 1)
        throw ValidationError("canvas dimensions must be >= 1", "canvas");
    for (std::size_t i = 0; i < layout.components.size(); ++i) {
        const auto& b = layout.components[i].bbox;
        const std::string field = "components[" + std::to_string(i) + "].bbox";
        if (b.w <= 0 || b.h <= 0) throw ValidationError("invalid bbox: width and height must be positive", field);
        if (b.x < 0 || b.y < 0 || b.x + b.w > layout.canvas.width || b.y + b.h > layout.canvas.height)
            throw ValidationError("invalid bbox: outside the canvas", field);
    }
}

std::string format_bbox(const BBox& box) {
    return "[" + std::to_string(box.x) + "," + std::to_string(box.y) + "," + std::to_string(box.w) + "," +
           std::to_string(box.h) + "]";
}

std::string serialize_layout_lines(const Layout& layout) {
    std::string out;
    for (const auto& c : layout.components) {
        if (!out.empty()) out += '\n';
        out += to_string(c.type);
        out += ' ';
        out += format_bbox(c.bbox);
    }
    return out;
}

std::vector<VqaTemplate> default_vqa_templates() {
    return {
        {ThemeAttribute::theme_color, "Question: What is the background color of this screenshot? Answer:"},
        {ThemeAttribute::primary_color, "Question: Besides the background, what's the dominant color in this image? Answer:"},
        {ThemeAttribute::theme_description, "Question: Can you describe this screenshot in detail? Answer:"},
        {ThemeAttribute::app_category, "Question: Which category does this app belong to? Answer:"},
    };
}

void validate_vqa_templates(const std::vector<VqaTemplate>& templates) {
    std::array<int, 4> seen{};
    for (const auto& t : templates) ++seen[static_cast<std::size_t>(t.attribute)];
    if (templates.size() != 4 || std::any_of(seen.begin(), seen.end(), [](int n) { return n != 1; }))
        throw ValidationError("VQA template set must cover each theme attribute exactly once");
}

std::vector<VqaTemplate> load_vqa_templates(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open " + path.string());
    const json doc = json::parse(in);
    static const std::map<std::string, ThemeAttribute> names{
        {"theme_color", ThemeAttribute::theme_color},
        {"primary_color", ThemeAttribute::primary_color},
        {"theme_description", ThemeAttribute::theme_description},
        {"app_category", ThemeAttribute::app_category},
    };
    std::vector<VqaTemplate> out;
    for (const auto& item : doc.at("templates")) {
        const auto name = item.at("attribute").get<std::string>();
        const auto it = names.find(name);
        if (it == names.end()) throw ValidationError("unknown VQA attribute '" + name + "'");
        out.push_back({it->second, item.at("question").get<std::string>()});
    }
    validate_vqa_templates(out);
    return out;
}

Layout parse_layout(const json& doc) {
    if (!doc.is_object()) throw ValidationError("layout must be an object");
    Layout layout;
    const auto canvas = doc.find("canvas");
    if (canvas == doc.end() || !canvas->is_object()) throw ValidationError("missing canvas", "canvas");
    layout.canvas.width = require_int(canvas->value("width", json()), "canvas.width");
    layout.canvas.height = require_int(canvas->value("height", json()), "canvas.height");
    const auto comps = doc.find("components");
    if (comps == doc.end() || !comps->is_array()) throw ValidationError("missing components", "components");
    for (std::size_t i = 0; i < comps->size(); ++i) {
        const auto& c = (*comps)[i];
        const std::string field = "components[" + std::to_string(i) + "]";
        if (!c.is_object()) throw ValidationError("component must be an object", field);
        LayoutComponent component;
        try {
            component.type = parse_component_type(c.value("type", std::string{}));
        } catch (const ValidationError& e) {
            throw ValidationError(e.what(), field + ".type");
        }
        const auto bbox = c.find("bbox");
        if (bbox == c.end() || !bbox->is_array() || bbox->size() != 4)
            throw ValidationError("bbox must be [x,y,w,h]", field + ".bbox");
        component.bbox = {require_int((*bbox)[0], field + ".bbox"), require_int((*bbox)[1], field + ".bbox"),
                          require_int((*bbox)[2], field + ".bbox"), require_int((*bbox)[3], field + ".bbox")};
        layout.components.push_back(component);
    }
    validate_layout(layout);
    return layout;
}

json layout_to_json(const Layout& layout) {
    json comps = json::array();
    for (const auto& c : layout.components)
        comps.push_back({{"type", to_string(c.type)}, {"bbox", {c.bbox.x, c.bbox.y, c.bbox.w, c.bbox.h}}});
    return {{"canvas", {{"width", layout.canvas.width}, {"height", layout.canvas.height}}}, {"components", comps}};
}

KnowledgeRecord parse_knowledge_record(const json& line, std::size_t record_index) {
    const std::string where = record_prefix(record_index);
    const std::string label = "record " + std::to_string(record_index);
    if (!line.is_object()) throw ValidationError(label + " is not an object", where);
    KnowledgeRecord record;
    record.id = require_string(line, "id", where, label);
    if (record.id.empty()) throw ValidationError("empty id at record " + std::to_string(record_index), where + ".id");
    try {
        record.layout = parse_layout(line);
    } catch (const ValidationError& e) {
        const std::string& field = e.field();
        const std::string what = field.find("bbox") != std::string::npos ? "invalid bbox" : "invalid field";
        throw ValidationError(what + " at record " + std::to_string(record_index) + " (" + field + ": " + e.what() + ")",
                              where + "." + field);
    }
    const auto& comps = line.at("components");
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const auto text = comps[i].find("text");
        if (text == comps[i].end() || text->is_null()) {
            record.component_texts.emplace_back(std::nullopt);
        } else if (text->is_string()) {
            auto value = text->get<std::string>();
            // An empty text is the same as no text.
            if (value.empty()) record.component_texts.emplace_back(std::nullopt);
            else record.component_texts.emplace_back(std::move(value));
        } else {
            throw ValidationError("non-string text at record " + std::to_string(record_index),
                                  where + ".components[" + std::to_string(i) + "].text");
        }
    }
    record.ui_description = require_string(line, "ui_description", where, label);
    const auto attrs = line.find("theme_attrs");
    if (attrs == line.end() || !attrs->is_object())
        throw ValidationError("missing theme_attrs at record " + std::to_string(record_index), where + ".theme_attrs");
    const std::string attrs_where = where + ".theme_attrs";
    record.theme_attrs.theme_color = require_string(*attrs, "theme_color", attrs_where, label);
    record.theme_attrs.primary_color = require_string(*attrs, "primary_color", attrs_where, label);
    record.theme_attrs.theme_description = require_string(*attrs, "theme_description", attrs_where, label);
    record.theme_attrs.app_category = require_string(*attrs, "app_category", attrs_where, label);
    return record;
}

json knowledge_record_to_json(const KnowledgeRecord& record) {
    json comps = json::array();
    for (std::size_t i = 0; i < record.layout.components.size(); ++i) {
        const auto& c = record.layout.components[i];
        json item = {{"type", to_string(c.type)}, {"bbox", {c.bbox.x, c.bbox.y, c.bbox.w, c.bbox.h}}};
        if (i < record.component_texts.size() && record.component_texts[i]) item["text"] = *record.component_texts[i];
        comps.push_back(std::move(item));
    }
    return {
        {"id", record.id},
        {"canvas", {{"width", record.layout.canvas.width}, {"height", record.layout.canvas.height}}},
        {"components", comps},
        {"ui_description", record.ui_description},
        {"theme_attrs",
         {{"theme_color", record.theme_attrs.theme_color},
          {"primary_color", record.theme_attrs.primary_color},
          {"theme_description", record.theme_attrs.theme_description},
          {"app_category", record.theme_attrs.app_category}}},
    };
}

std::string serialize_knowledge_record(const KnowledgeRecord& record) { return knowledge_record_to_json(record).dump(); }

std::vector<KnowledgeRecord> load_knowledge_base(const std::filesystem::path& path) {
    std::vector<KnowledgeRecord> records;
    std::set<std::string> ids;
    for (const auto& file : record_files(path)) {
        for (const auto& line : read_lines(file)) {
            const auto index = records.size();
            json doc;
            try {
                doc = json::parse(line);
            } catch (const json::parse_error& e) {
                throw ValidationError("malformed JSON at record " + std::to_string(index) + ": " + e.what(),
                                      record_prefix(index));
            }
            auto record = parse_knowledge_record(doc, index);
            if (!ids.insert(record.id).second)
                throw ValidationError("duplicate id '" + record.id + "' at record " + std::to_string(index),
                                      record_prefix(index) + ".id");
            records.push_back(std::move(record));
        }
    }
    return records;
}

IconRecord parse_icon_record(const json& line, std::size_t record_index) {
    const std::string where = "icons[" + std::to_string(record_index) + "]";
    const std::string label = "icon record " + std::to_string(record_index);
    if (!line.is_object()) throw ValidationError(label + " is not an object", where);
    IconRecord icon{require_string(line, "id", where, label), require_string(line, "phrase", where, label),
                    require_string(line, "svg", where, label)};
    if (icon.phrase.empty()) throw ValidationError("empty phrase for icon '" + icon.id + "'", where + ".phrase");
    std::string error;
    if (!is_well_formed_xml(icon.svg_source, &error))
        throw ValidationError("invalid SVG for icon '" + icon.id + "': " + error, where + ".svg");
    return icon;
}

std::vector<IconRecord> load_icon_base(const std::filesystem::path& path) {
    std::vector<IconRecord> icons;
    std::set<std::string> ids;
    for (const auto& file : record_files(path)) {
        for (const auto& line : read_lines(file)) {
            const auto index = icons.size();
            json doc;
            try {
                doc = json::parse(line);
            } catch (const json::parse_error& e) {
                throw ValidationError("malformed JSON at icon " + std::to_string(index) + ": " + e.what());
            }
            auto icon = parse_icon_record(doc, index);
            if (!ids.insert(icon.id).second) throw ValidationError("duplicate icon id '" + icon.id + "'");
            icons.push_back(std::move(icon));
        }
    }
    return icons;
}

namespace {

std::string escape_line(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (c == '\\') out += "\\\\";
        else if (c == '\n') out += "\\n";
        else if (c == '\r') out += "\\r";
        else out += c;
    }
    return out;
}

bool looks_like_layout_line(const std::string& line) {
    static const std::regex layout_line(R"(^[A-Za-z]+ \[-?\d+,-?\d+,-?\d+,-?\d+\]$)");
    return std::regex_match(line, layout_line);
}

}  // namespace

std::string knowledge_record_to_text(const KnowledgeRecord& record) {
    std::ostringstream out;
    if (!record.layout.components.empty()) out << serialize_layout_lines(record.layout) << '\n';
    // Texts of a leading run of texted components appear verbatim. After the
    // first component without text, each line carries its component index.
    std::size_t emitted = 0;
    for (std::size_t i = 0; i < record.component_texts.size(); ++i) {
        const auto& text = record.component_texts[i];
        if (!text || text->empty()) continue;
        auto line = escape_line(*text);
        if (emitted != i) {
            line = "[" + std::to_string(i) + "] " + line;
        } else if (line.front() == '[' || line.front() == '\\' || looks_like_layout_line(line)) {
            line = "\\" + line;
        }
        out << line << '\n';
        ++emitted;
    }
    out << escape_line(record.ui_description) << '\n';
    out << "theme_color: " << escape_line(record.theme_attrs.theme_color) << '\n';
    out << "primary_color: " << escape_line(record.theme_attrs.primary_color) << '\n';
    out << "theme_description: " << escape_line(record.theme_attrs.theme_description) << '\n';
    out << "app_category: " << escape_line(record.theme_attrs.app_category) << '\n';
    out << "canvas: " << record.layout.canvas.width << 'x' << record.layout.canvas.height;
    return out.str();
}

KnowledgeBaseStats compute_stats(const std::vector<KnowledgeRecord>& records) {
    KnowledgeBaseStats stats;
    stats.records = records.size();
    std::map<std::string, std::size_t> categories;
    for (const auto& r : records) {
        stats.components += r.layout.components.size();
        for (const auto& c : r.layout.components) ++stats.per_type[static_cast<std::size_t>(c.type)];
        ++categories[r.theme_attrs.app_category];
    }
    stats.categories.assign(categories.begin(), categories.end());
    return stats;
}

}  // namespace protoflow
