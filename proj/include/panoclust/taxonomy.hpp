#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace panoclust {

// Class taxonomy with the thing/stuff split. Class 0 is reserved for
// "unlabeled" and is excluded from evaluation and clustering.
class Taxonomy {
 public:
  Taxonomy() = default;
  Taxonomy(std::vector<std::pair<uint32_t, std::string>> classes,
           std::set<uint32_t> things);

  // Text format, one entry per line:
  //   class <id> <name>
  //   things: <id> <id> ...
  // '#' starts a comment. Stuff is every listed class that is neither a
  // thing nor class 0.
  static Taxonomy from_string(const std::string& text);
  static Taxonomy from_file(const std::string& path);

  bool is_thing(uint32_t cls) const { return things_.count(cls) > 0; }
  bool is_stuff(uint32_t cls) const { return stuff_.count(cls) > 0; }
  bool is_known(uint32_t cls) const;
  bool is_ignored(uint32_t cls) const { return cls == 0 || !is_known(cls); }

  const std::set<uint32_t>& things() const { return things_; }
  const std::set<uint32_t>& stuff() const { return stuff_; }
  const std::vector<std::pair<uint32_t, std::string>>& classes() const { return classes_; }

  std::string name_of(uint32_t cls) const;

 private:
  std::vector<std::pair<uint32_t, std::string>> classes_;
  std::set<uint32_t> things_;
  std::set<uint32_t> stuff_;
};

}  // namespace panoclust
