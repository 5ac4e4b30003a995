#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "squatguard/canonical.hpp"

namespace squatguard {

// Keyed record collections plus append-only logs. append_log must be durable
// (flushed) before it returns; the audit trail depends on that ordering.
class StorageBackend {
 public:
  virtual ~StorageBackend() = default;
  virtual std::optional<json> get(const std::string& collection,
                                  const std::string& id) = 0;
  virtual void put(const std::string& collection, const std::string& id,
                   const json& value) = 0;
  virtual void erase(const std::string& collection, const std::string& id) = 0;
  // Entries ordered by id.
  virtual std::vector<std::pair<std::string, json>> scan(
      const std::string& collection) = 0;
  virtual void append_log(const std::string& log, const std::string& line) = 0;
  virtual std::vector<std::string> read_log(const std::string& log) = 0;
};

class MemoryBackend : public StorageBackend {
 public:
  std::optional<json> get(const std::string& c, const std::string& id) override;
  void put(const std::string& c, const std::string& id, const json& v) override;
  void erase(const std::string& c, const std::string& id) override;
  std::vector<std::pair<std::string, json>> scan(const std::string& c) override;
  void append_log(const std::string& log, const std::string& line) override;
  std::vector<std::string> read_log(const std::string& log) override;

 private:
  std::mutex mu_;
  std::map<std::string, std::map<std::string, json>> collections_;
  std::map<std::string, std::vector<std::string>> logs_;
};

// Snapshot plus write-ahead log under one directory. Startup replays
// snapshot.json then records.wal; compact() folds the WAL into the snapshot.
// Logs live as <name>.log JSONL files, flushed per line.
class FileBackend : public StorageBackend {
 public:
  explicit FileBackend(std::filesystem::path dir);
  ~FileBackend() override;

  std::optional<json> get(const std::string& c, const std::string& id) override;
  void put(const std::string& c, const std::string& id, const json& v) override;
  void erase(const std::string& c, const std::string& id) override;
  std::vector<std::pair<std::string, json>> scan(const std::string& c) override;
  void append_log(const std::string& log, const std::string& line) override;
  std::vector<std::string> read_log(const std::string& log) override;
  void compact();

 private:
  void load();
  void append_wal(const json& entry);
  std::ofstream& log_stream(const std::string& log);

  std::filesystem::path dir_;
  std::mutex mu_;
  std::map<std::string, std::map<std::string, json>> collections_;
  std::ofstream wal_;
  std::map<std::string, std::ofstream> log_streams_;
};

std::unique_ptr<StorageBackend> make_backend(const std::string& storage_path);

}  // namespace squatguard
