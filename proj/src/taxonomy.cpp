#include "panoclust/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "panoclust/errors.hpp"

namespace panoclust {

Taxonomy::Taxonomy(std::vector<std::pair<uint32_t, std::string>> classes,
                   std::set<uint32_t> things)
    : classes_(std::move(classes)), things_(std::move(things)) {
  for (const auto& [id, name] : classes_) {
    (void)name;
    if (id != 0 && things_.count(id) == 0) {
      stuff_.insert(id);
    }
  }
  for (uint32_t id : things_) {
    if (!is_known(id)) {
      throw ConfigError("thing id " + std::to_string(id) + " is not a listed class");
    }
    if (id == 0) {
      throw ConfigError("class 0 is reserved for unlabeled and cannot be a thing");
    }
  }
}

bool Taxonomy::is_known(uint32_t cls) const {
  return std::any_of(classes_.begin(), classes_.end(),
                     [cls](const auto& entry) { return entry.first == cls; });
}

std::string Taxonomy::name_of(uint32_t cls) const {
  for (const auto& [id, name] : classes_) {
    if (id == cls) return name;
  }
  return "class" + std::to_string(cls);
}

Taxonomy Taxonomy::from_string(const std::string& text) {
  std::vector<std::pair<uint32_t, std::string>> classes;
  std::set<uint32_t> things;

  std::istringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);

    std::istringstream tokens(line);
    std::string key;
    if (!(tokens >> key)) continue;

    if (key == "class") {
      long id = -1;
      std::string name;
      if (!(tokens >> id >> name) || id < 0) {
        throw ConfigError("bad taxonomy line: " + line);
      }
      classes.emplace_back(static_cast<uint32_t>(id), name);
    } else if (key == "things:" || key == "things") {
      long id = -1;
      while (tokens >> id) {
        if (id <= 0) throw ConfigError("bad thing id in taxonomy: " + line);
        things.insert(static_cast<uint32_t>(id));
      }
    } else {
      throw ConfigError("unknown taxonomy key: " + key);
    }
  }
  return Taxonomy(std::move(classes), std::move(things));
}

Taxonomy Taxonomy::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open taxonomy file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str());
}

}  // namespace panoclust
