#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermopress/sft.hpp"

namespace thermopress {

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

/// Parsed model document: the subshift plus named locally constant
/// functions, with the content hash of the source bytes.
struct ModelFile {
  SftModel model;
  std::map<std::string, LocallyConstantFn> functions;
  std::string content_hash;

  const LocallyConstantFn& fn(const std::string& name) const {
    auto it = functions.find(name);
    if (it == functions.end())
      throw std::invalid_argument("model declares no function named '" + name + "'");
    return it->second;
  }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                std::initializer_list<const char*> allowed,
                                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) known = true;
    if (!known)
      throw std::invalid_argument("unknown key \"" + it.key() + "\" in " + where);
  }
}

inline std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

/// Parses the model document format:
///   {"alphabet": m, "transition": [[0/1,...],...],
///    "functions": {"name": {"depth": k, "table": {"word": value, ...}}}}
/// Words are strings of symbol characters (0-9 then A-Z). Tables must cover
/// exactly the admissible k-words; unknown keys are rejected at every level.
inline ModelFile parse_model_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    auto [line, col] = detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw std::invalid_argument("model file is not valid JSON at line " +
                                std::to_string(line) + ", column " + std::to_string(col) +
                                ": " + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("model document must be a JSON object");
  detail::reject_unknown_keys(doc, {"alphabet", "transition", "functions"}, "model document");
  if (!doc.contains("alphabet") || !doc["alphabet"].is_number_integer())
    throw std::invalid_argument("\"alphabet\" must be an integer");
  int m = doc["alphabet"].get<int>();
  if (m < 1 || m > 36)
    throw std::invalid_argument("alphabet size must be between 1 and 36");
  if (!doc.contains("transition") || !doc["transition"].is_array())
    throw std::invalid_argument("\"transition\" must be an array of rows");
  std::vector<std::vector<int>> rows;
  for (const auto& r : doc["transition"]) {
    if (!r.is_array()) throw std::invalid_argument("transition rows must be arrays");
    std::vector<int> row;
    for (const auto& v : r) {
      if (!v.is_number_integer())
        throw std::invalid_argument("transition entries must be integers 0 or 1");
      row.push_back(v.get<int>());
    }
    rows.push_back(std::move(row));
  }
  SftModel model(m, rows);

  std::map<std::string, LocallyConstantFn> fns;
  if (doc.contains("functions")) {
    if (!doc["functions"].is_object())
      throw std::invalid_argument("\"functions\" must be an object");
    for (auto it = doc["functions"].begin(); it != doc["functions"].end(); ++it) {
      const std::string& name = it.key();
      const nlohmann::json& body = it.value();
      if (!body.is_object())
        throw std::invalid_argument("function \"" + name + "\" must be an object");
      detail::reject_unknown_keys(body, {"depth", "table"}, "function \"" + name + "\"");
      if (!body.contains("depth") || !body["depth"].is_number_integer())
        throw std::invalid_argument("function \"" + name + "\" needs integer \"depth\"");
      int depth = body["depth"].get<int>();
      if (depth < 1) throw std::invalid_argument("depth must be >= 1");
      if (!body.contains("table") || !body["table"].is_object())
        throw std::invalid_argument("function \"" + name + "\" needs object \"table\"");
      LocallyConstantFn f(model, depth, 0.0);
      std::uint64_t expected = model.word_count(depth);
      std::uint64_t seen = 0;
      for (auto t = body["table"].begin(); t != body["table"].end(); ++t) {
        Word w;
        try {
          w = Word::parse(t.key());
        } catch (const std::invalid_argument&) {
          throw std::invalid_argument("function \"" + name + "\": bad word \"" + t.key() +
                                      "\"");
        }
        if (w.length() != depth)
          throw std::invalid_argument("function \"" + name + "\": word \"" + t.key() +
                                      "\" does not have length " + std::to_string(depth));
        if (!model.admissible_word(w.symbols))
          throw std::invalid_argument("function \"" + name + "\": word \"" + t.key() +
                                      "\" is not admissible");
        if (!t.value().is_number())
          throw std::invalid_argument("function \"" + name + "\": value for \"" + t.key() +
                                      "\" must be a number");
        f.set(w.symbols, t.value().get<double>());
        ++seen;
      }
      if (seen != expected)
        throw std::invalid_argument("function \"" + name + "\": table covers " +
                                    std::to_string(seen) + " words but the model admits " +
                                    std::to_string(expected));
      fns.emplace(name, std::move(f));
    }
  }
  return ModelFile{std::move(model), std::move(fns), hex64(fnv1a64(text))};
}

inline ModelFile load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_json(buf.str());
}

}  // namespace thermopress
