#include "ccopt/patch/source_tree.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ccopt::patch {

namespace fs = std::filesystem;

namespace {

FileRole role_for(const fs::path& p) {
    auto ext = p.extension().string();
    return (ext == ".h" || ext == ".hpp" || ext == ".hh") ? FileRole::Header
                                                          : FileRole::Implementation;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

SourceTree SourceTree::load(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
    std::vector<fs::path> paths;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file()) paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    SourceTree tree;
    for (const auto& p : paths) {
        tree.add(fs::relative(p, dir).generic_string(), read_file(p));
    }
    return tree;
}

void SourceTree::add(std::string path, std::string text) {
    if (find(path)) throw std::runtime_error("duplicate path: " + path);
    FileRole role = role_for(fs::path(path));
    files_.push_back({std::move(path), role, std::move(text)});
}

void SourceTree::render(const fs::path& dir) const {
    fs::create_directories(dir);
    for (const auto& f : files_) {
        fs::path out = dir / f.path;
        fs::create_directories(out.parent_path());
        std::ofstream os(out, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + out.string());
        os.write(f.text.data(), static_cast<std::streamsize>(f.text.size()));
    }
}

SourceFile* SourceTree::find(const std::string& path) {
    for (auto& f : files_)
        if (f.path == path) return &f;
    return nullptr;
}

const SourceFile* SourceTree::find(const std::string& path) const {
    for (const auto& f : files_)
        if (f.path == path) return &f;
    return nullptr;
}

}  // namespace ccopt::patch
