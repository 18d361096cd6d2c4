#include "minihls/io.hpp"

#include <json.hpp>

#include "minihls/common.hpp"

namespace minihls {

KernelIO parse_vectors_json(const std::string &text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    fail(ErrorKind::VectorShape, std::string("vectors: ") + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::VectorShape, "vectors: top level must be an object");
  KernelIO io;
  try {
    if (doc.contains("memories")) {
      for (const auto &[name, values] : doc.at("memories").items())
        io.memories[name] = values.get<std::vector<int64_t>>();
    }
    if (doc.contains("scalars")) {
      for (const auto &[name, value] : doc.at("scalars").items()) io.scalars[name] = value.get<int64_t>();
    }
  } catch (const nlohmann::json::exception &e) {
    fail(ErrorKind::VectorShape, std::string("vectors: ") + e.what());
  }
  return io;
}

std::string to_json(const KernelIO &io) {
  nlohmann::ordered_json doc;
  doc["memories"] = nlohmann::ordered_json::object();
  for (const auto &[name, values] : io.memories) doc["memories"][name] = values;
  doc["scalars"] = nlohmann::ordered_json::object();
  for (const auto &[name, value] : io.scalars) doc["scalars"][name] = value;
  return doc.dump();
}

}  // namespace minihls
