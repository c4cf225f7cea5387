#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"
#include "ontosearch/kb.hpp"

namespace ontosearch {

namespace {

using nlohmann::json;

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

/// Walks a parsed document and converts it, reporting schema errors by JSON path.
class Reader {
 public:
  [[noreturn]] static void fail(const std::string& path, const std::string& message) {
    throw ParseError(path + ": " + message);
  }

  static void require_keys(const json& obj, const std::string& path,
                           std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : obj.items()) {
      bool known = false;
      for (auto a : allowed) known = known || key == a;
      if (!known) fail(path, "unknown key '" + key + "'");
    }
  }

  static const json& member(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, std::string("missing key '") + key + "'");
    return *it;
  }

  static std::string string_at(const json& obj, const std::string& path, const char* key) {
    const json& v = member(obj, path, key);
    if (!v.is_string()) fail(path + "." + key, "expected a string");
    return v.get<std::string>();
  }

  static std::optional<std::string> optional_string_at(const json& obj, const std::string& path,
                                                       const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) fail(path + "." + key, "expected a string or null");
    return it->get<std::string>();
  }

  static const json& array_at(const json& obj, const std::string& path, const char* key) {
    const json& v = member(obj, path, key);
    if (!v.is_array()) fail(path + "." + key, "expected an array");
    return v;
  }

  static std::vector<std::string> strings(const json& arr, const std::string& path) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_string()) fail(path + "[" + std::to_string(i) + "]", "expected a string");
      out.push_back(arr[i].get<std::string>());
    }
    return out;
  }

  static const json* top_array(const json& root, const char* key) {
    auto it = root.find(key);
    if (it == root.end()) return nullptr;
    if (!it->is_array()) fail(key, "expected an array");
    return &*it;
  }

  static KbDocument read(const json& root) {
    require_keys(root, "$", {"classes", "concepts", "departments", "employees", "cases", "lexicon"});
    KbDocument doc;

    if (const json* arr = top_array(root, "classes")) {
      for (std::size_t i = 0; i < arr->size(); ++i) {
        const std::string path = "classes[" + std::to_string(i) + "]";
        const json& obj = (*arr)[i];
        require_keys(obj, path, {"name", "parent"});
        doc.classes.push_back({string_at(obj, path, "name"), optional_string_at(obj, path, "parent")});
      }
    }

    if (const json* arr = top_array(root, "concepts")) {
      for (auto& id : strings(*arr, "concepts")) {
        if (!doc.concepts.insert(id).second) doc.duplicate_concepts.push_back(id);
      }
    }

    if (const json* arr = top_array(root, "departments")) {
      for (std::size_t i = 0; i < arr->size(); ++i) {
        const std::string path = "departments[" + std::to_string(i) + "]";
        const json& obj = (*arr)[i];
        require_keys(obj, path, {"id", "name", "aliases"});
        Department d{string_at(obj, path, "id"), string_at(obj, path, "name"), {}};
        if (obj.contains("aliases")) {
          auto aliases = strings(array_at(obj, path, "aliases"), path + ".aliases");
          d.aliases.insert(aliases.begin(), aliases.end());
        }
        doc.departments.push_back(std::move(d));
      }
    }

    if (const json* arr = top_array(root, "employees")) {
      for (std::size_t i = 0; i < arr->size(); ++i) {
        const std::string path = "employees[" + std::to_string(i) + "]";
        const json& obj = (*arr)[i];
        require_keys(obj, path, {"id", "full_name", "phone", "email", "position_title", "department_id"});
        doc.employees.push_back({string_at(obj, path, "id"), string_at(obj, path, "full_name"),
                                 string_at(obj, path, "phone"), string_at(obj, path, "email"),
                                 string_at(obj, path, "position_title"),
                                 string_at(obj, path, "department_id")});
      }
    }

    if (const json* arr = top_array(root, "cases")) {
      for (std::size_t i = 0; i < arr->size(); ++i) {
        const std::string path = "cases[" + std::to_string(i) + "]";
        const json& obj = (*arr)[i];
        require_keys(obj, path, {"id", "employee_id", "concepts", "department_id", "factor", "peers"});
        Case c;
        c.id = string_at(obj, path, "id");
        c.employee_id = string_at(obj, path, "employee_id");
        auto concepts = strings(array_at(obj, path, "concepts"), path + ".concepts");
        c.concepts.insert(concepts.begin(), concepts.end());
        c.department_id = optional_string_at(obj, path, "department_id");
        const json& factor = member(obj, path, "factor");
        if (!factor.is_number()) fail(path + ".factor", "expected a number");
        c.factor = factor.get<double>();
        const json& peers = member(obj, path, "peers");
        if (!peers.is_number_integer()) fail(path + ".peers", "expected an integer");
        if (peers.is_number_unsigned()) {
          auto u = peers.get<std::uint64_t>();
          if (u > static_cast<std::uint64_t>(INT64_MAX)) fail(path + ".peers", "integer out of range");
          c.peers = static_cast<std::int64_t>(u);
        } else {
          c.peers = peers.get<std::int64_t>();
        }
        doc.cases.push_back(std::move(c));
      }
    }

    if (auto it = root.find("lexicon"); it != root.end()) {
      if (!it->is_object()) fail("lexicon", "expected an object");
      for (const auto& [term, concepts] : it->items()) {
        const std::string path = "lexicon." + term;
        if (!concepts.is_array()) fail(path, "expected an array");
        auto ids = strings(concepts, path);
        doc.lexicon[term].insert(ids.begin(), ids.end());
      }
    }
    return doc;
  }
};

json to_json(const KbDocument& doc) {
  json classes = json::array();
  for (const auto& c : doc.classes) {
    classes.push_back({{"name", c.name}, {"parent", c.parent ? json(*c.parent) : json(nullptr)}});
  }
  json departments = json::array();
  for (const auto& d : doc.departments) {
    departments.push_back({{"id", d.id}, {"name", d.name}, {"aliases", d.aliases}});
  }
  json employees = json::array();
  for (const auto& e : doc.employees) {
    employees.push_back({{"id", e.id},
                         {"full_name", e.full_name},
                         {"phone", e.phone},
                         {"email", e.email},
                         {"position_title", e.position_title},
                         {"department_id", e.department_id}});
  }
  json cases = json::array();
  for (const auto& c : doc.cases) {
    cases.push_back({{"id", c.id},
                     {"employee_id", c.employee_id},
                     {"concepts", c.concepts},
                     {"department_id", c.department_id ? json(*c.department_id) : json(nullptr)},
                     {"factor", c.factor},
                     {"peers", c.peers}});
  }
  json lexicon = json::object();
  for (const auto& [term, concepts] : doc.lexicon) lexicon[term] = concepts;

  return {{"classes", std::move(classes)},     {"concepts", doc.concepts},
          {"departments", std::move(departments)}, {"employees", std::move(employees)},
          {"cases", std::move(cases)},         {"lexicon", std::move(lexicon)}};
}

}  // namespace

KbDocument parse_kb_document(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    auto [line, column] = line_column(text, e.byte);
    throw ParseError(std::string("malformed knowledge base document: ") + e.what(), line, column);
  }
  return Reader::read(root);
}

KnowledgeBase load_kb(std::string_view text) {
  return KnowledgeBase::from_document(parse_kb_document(text));
}

KnowledgeBase load_kb(std::istream& source) {
  std::string text{std::istreambuf_iterator<char>(source), std::istreambuf_iterator<char>()};
  return load_kb(std::string_view(text));
}

KnowledgeBase load_kb_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open knowledge base file '" + path.string() + "'");
  return load_kb(in);
}

std::string serialize_kb(const KbDocument& doc) { return to_json(doc).dump(2) + "\n"; }

std::string serialize_kb(const KnowledgeBase& kb) { return serialize_kb(kb.document()); }

}  // namespace ontosearch
