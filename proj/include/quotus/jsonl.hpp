#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include <json.hpp>

namespace quotus::jsonl {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

/// Calls `fn(record, line_number)` for each non-blank line (1-based line
/// numbers). Unparseable lines raise InputError naming the line.
void for_each_record(const std::filesystem::path& path,
                     const std::function<void(const Json&, std::size_t)>& fn);

/// Buffers records (one per line) and writes them on close(). Parent
/// directories are created.
class Writer {
public:
    explicit Writer(std::filesystem::path path) : path_(std::move(path)) {}
    ~Writer();
    Writer(const Writer&) = delete;
    Writer& operator=(const Writer&) = delete;

    void write(const OrderedJson& record);
    void close();

private:
    std::filesystem::path path_;
    std::string buffer_;
    bool closed_ = false;
};

/// Field accessors that raise "missing field <name> at line <n>" or
/// "field <name> at line <n> must be a <type>".
std::string require_string(const Json& rec, const char* name, std::size_t line);
double require_number(const Json& rec, const char* name, std::size_t line);
std::int64_t require_integer(const Json& rec, const char* name, std::size_t line);
const Json& require_array(const Json& rec, const char* name, std::size_t line);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace quotus::jsonl
