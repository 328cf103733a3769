#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dropwarn::cli {

std::string Sha256Hex(const std::string& bytes);
std::string ReadFile(const std::string& path);

// Collects every output in memory and writes them only once the command has
// succeeded: each file goes to a temporary name in the output directory and
// is renamed into place.
class OutputSet {
 public:
  explicit OutputSet(std::string dir) : dir_(std::move(dir)) {}

  void Add(const std::string& name, std::string bytes) { files_[name] = std::move(bytes); }
  const std::map<std::string, std::string>& files() const { return files_; }
  std::string PathOf(const std::string& name) const;

  void Commit() const;

 private:
  std::string dir_;
  std::map<std::string, std::string> files_;
};

// Run manifest: argv, resolved configuration and SHA-256 of every input and output.
nlohmann::json Manifest(const std::string& subcommand, const std::vector<std::string>& argv,
                        const nlohmann::json& config, const std::vector<std::string>& inputs,
                        const OutputSet& outputs);

}  // namespace dropwarn::cli
