#include "quotus/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "quotus/common.hpp"

namespace quotus::jsonl {

namespace {

std::string at_line(std::size_t line) { return " at line " + std::to_string(line); }

}  // namespace

void for_each_record(const std::filesystem::path& path,
                     const std::function<void(const Json&, std::size_t)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        Json rec;
        try {
            rec = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw InputError("malformed record" + at_line(lineno) + ": " + e.what());
        }
        if (!rec.is_object()) throw InputError("malformed record" + at_line(lineno) + ": not an object");
        fn(rec, lineno);
    }
}

Writer::~Writer() {
    try {
        close();
    } catch (...) {
    }
}

void Writer::write(const OrderedJson& record) {
    buffer_ += record.dump();
    buffer_ += '\n';
}

void Writer::close() {
    if (closed_) return;
    closed_ = true;
    write_text(path_, buffer_);
}

std::string require_string(const Json& rec, const char* name, std::size_t line) {
    auto it = rec.find(name);
    if (it == rec.end()) throw InputError(std::string("missing field ") + name + at_line(line));
    if (!it->is_string()) throw InputError(std::string("field ") + name + at_line(line) + " must be a string");
    return it->get<std::string>();
}

double require_number(const Json& rec, const char* name, std::size_t line) {
    auto it = rec.find(name);
    if (it == rec.end()) throw InputError(std::string("missing field ") + name + at_line(line));
    if (!it->is_number()) throw InputError(std::string("field ") + name + at_line(line) + " must be a number");
    return it->get<double>();
}

std::int64_t require_integer(const Json& rec, const char* name, std::size_t line) {
    auto it = rec.find(name);
    if (it == rec.end()) throw InputError(std::string("missing field ") + name + at_line(line));
    if (!it->is_number_integer()) throw InputError(std::string("field ") + name + at_line(line) + " must be an integer");
    return it->get<std::int64_t>();
}

const Json& require_array(const Json& rec, const char* name, std::size_t line) {
    auto it = rec.find(name);
    if (it == rec.end()) throw InputError(std::string("missing field ") + name + at_line(line));
    if (!it->is_array()) throw InputError(std::string("field ") + name + at_line(line) + " must be an array");
    return *it;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace quotus::jsonl
