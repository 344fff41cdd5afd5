#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ccopt::patch {

enum class FileRole { Header, Implementation };

struct SourceFile {
    std::string path;  // relative path, unique within the tree
    FileRole role;
    std::string text;  // byte-preserved
};

// Ordered set of source files. Load/render round-trips byte-identically.
class SourceTree {
public:
    SourceTree() = default;

    // Loads every regular file under `dir` (sorted by relative path).
    // .h/.hpp are tagged Header, everything else Implementation.
    static SourceTree load(const std::filesystem::path& dir);

    void add(std::string path, std::string text);
    void render(const std::filesystem::path& dir) const;

    const std::vector<SourceFile>& files() const { return files_; }
    std::vector<SourceFile>& files() { return files_; }
    SourceFile* find(const std::string& path);
    const SourceFile* find(const std::string& path) const;

private:
    std::vector<SourceFile> files_;
};

}  // namespace ccopt::patch
