#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ccopt/patch/apply.hpp"
#include "ccopt/patch/blocks.hpp"
#include "ccopt/patch/scan.hpp"
#include "ccopt/patch/source_tree.hpp"

using namespace ccopt::patch;
namespace fs = std::filesystem;

static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TEST_CASE("single function block parses") {
    std::string text = "UPDATE FUNCTION `F`:\n```\nvoid F(void){}\n```\n";
    auto r = parse_update_blocks(text);
    REQUIRE(r.errors.empty());
    REQUIRE(r.blocks.size() == 1);
    CHECK(r.blocks[0].kind == BlockKind::FunctionRewrite);
    CHECK(r.blocks[0].target_name == "F");
    CHECK(r.blocks[0].body == "void F(void){}\n");
}

TEST_CASE("empty input gives empty result") {
    auto r = parse_update_blocks("");
    CHECK(r.blocks.empty());
    CHECK(r.errors.empty());
}

TEST_CASE("prose without blocks gives empty result") {
    auto r = parse_update_blocks("Here is my analysis of the congestion controller.\nNothing.");
    CHECK(r.blocks.empty());
    CHECK(r.errors.empty());
}

TEST_CASE("three kinds in document order") {
    std::string text =
        "intro prose\n"
        "UPDATE FUNCTION `Fn`:\n```c\nint Fn(void){return 1;}\n```\n"
        "more prose\n"
        "UPDATE VARIABLE `gCount`:\n```\nstatic int gCount = 2;\n```\n"
        "ADD MEMBER TO `Box`:\n```\ndouble Weight;\n```\n"
        "closing prose\n";
    auto r = parse_update_blocks(text);
    REQUIRE(r.errors.empty());
    REQUIRE(r.blocks.size() == 3);
    CHECK(r.blocks[0].kind == BlockKind::FunctionRewrite);
    CHECK(r.blocks[1].kind == BlockKind::VariableRewrite);
    CHECK(r.blocks[2].kind == BlockKind::StructMemberAdd);
    CHECK(r.blocks[1].target_name == "gCount");
    CHECK(r.blocks[2].target_name == "Box");
}

TEST_CASE("colon is optional and language tags tolerated") {
    std::string text = "UPDATE FUNCTION `F`\n```c\nvoid F(void){}\n```\n";
    auto r = parse_update_blocks(text);
    REQUIRE(r.blocks.size() == 1);
    CHECK(r.errors.empty());
}

TEST_CASE("header without fence is reported, prior blocks kept") {
    std::string text =
        "UPDATE FUNCTION `A`:\n```\nvoid A(void){}\n```\n"
        "UPDATE FUNCTION `B`:\nno fence here\n";
    auto r = parse_update_blocks(text);
    REQUIRE(r.blocks.size() == 1);
    CHECK(r.blocks[0].target_name == "A");
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].block_index == 1);
    CHECK(r.errors[0].message == "missing fence after header");
}

TEST_CASE("unclosed fence is reported") {
    std::string text = "UPDATE FUNCTION `A`:\n```\nvoid A(void){\n";
    auto r = parse_update_blocks(text);
    CHECK(r.blocks.empty());
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].message == "unclosed fence");
}

TEST_CASE("empty fenced body is reported") {
    std::string text = "UPDATE FUNCTION `A`:\n```\n\n```\n";
    auto r = parse_update_blocks(text);
    CHECK(r.blocks.empty());
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].message == "empty body");
}

// parse never aborts on hostile input
TEST_CASE("parse is total over noisy inputs") {
    const char* inputs[] = {
        "``` ``` ```",
        "UPDATE FUNCTION ``:\n```\nx\n```",
        "UPDATE FUNCTION `a b`:\n```\nx\n```",
        "ADD MEMBER TO `S`",
        "\n\n\n```\nderelict fence\n```\n",
        "UPDATE VARIABLE `x`:\r\n```\r\nint x = 1;\r\n```\r\n",
    };
    for (const char* t : inputs) {
        auto r = parse_update_blocks(t);
        CHECK(r.blocks.size() + r.errors.size() <= 4);
    }
}

TEST_CASE("locate_function finds the second definition") {
    std::string src = "int a(){return 0;}\nint b(){return 1;}";
    auto loc = locate_function(src, "b");
    REQUIRE(loc.status == LocateStatus::Found);
    CHECK(src.substr(loc.span.begin, loc.span.end - loc.span.begin) == "int b(){return 1;}");
}

TEST_CASE("locate_function absent name") {
    auto loc = locate_function("int a(){return 0;}", "zzz");
    CHECK(loc.status == LocateStatus::NotFound);
}

TEST_CASE("locate_function ignores names in comments and strings") {
    std::string src = "/* int c() */\nconst char* s = \"c()\";\nint d(){return 0;}\n";
    CHECK(locate_function(src, "c").status == LocateStatus::NotFound);
    CHECK(locate_function(src, "d").status == LocateStatus::Found);
}

TEST_CASE("locate_function skips declarations") {
    std::string src = "int f(int x);\nint f(int x){return x;}\n";
    auto loc = locate_function(src, "f");
    REQUIRE(loc.status == LocateStatus::Found);
    CHECK(src.substr(loc.span.begin, loc.span.end - loc.span.begin) ==
          "int f(int x){return x;}");
}

TEST_CASE("locate_function handles multi-line signatures") {
    std::string src = "#include <stdint.h>\nstatic\nuint64_t\nSlow(\n  int x\n  )\n{\n  return x;\n}\n";
    auto loc = locate_function(src, "Slow");
    REQUIRE(loc.status == LocateStatus::Found);
    std::string span = src.substr(loc.span.begin, loc.span.end - loc.span.begin);
    CHECK(span.starts_with("static"));
    CHECK(span.ends_with("}"));
}

TEST_CASE("two definitions are ambiguous") {
    std::string src = "int f(){return 0;}\nint f(){return 1;}\n";
    CHECK(locate_function(src, "f").status == LocateStatus::Ambiguous);
}

TEST_CASE("locate_variable covers the whole statement") {
    std::string src = "int x = 1;\nstatic double Rate[3] = {1.0, 2.0, 3.0};\nint y;\n";
    auto loc = locate_variable(src, "Rate");
    REQUIRE(loc.status == LocateStatus::Found);
    CHECK(src.substr(loc.span.begin, loc.span.end - loc.span.begin) ==
          "static double Rate[3] = {1.0, 2.0, 3.0};");
}

TEST_CASE("locate_struct_close on both struct spellings") {
    std::string a = "struct Box {\n  int a;\n};\n";
    std::string b = "typedef struct {\n  int a;\n} Box;\n";
    auto ca = locate_struct_close(a, "Box");
    auto cb = locate_struct_close(b, "Box");
    REQUIRE(ca.has_value());
    REQUIRE(cb.has_value());
    CHECK(a[*ca] == '}');
    CHECK(b[*cb] == '}');
    CHECK_FALSE(locate_struct_close(a, "NotThere").has_value());
}

TEST_CASE("source tree round-trips byte-identically") {
    fs::path dir = fs::temp_directory_path() / "ccopt_tree_rt";
    fs::remove_all(dir);
    fs::create_directories(dir / "sub");
    std::ofstream(dir / "a.h") << "#pragma once\nint f(void);\n";
    std::ofstream(dir / "sub/b.c") << "// body\nint f(void){return 3;}\n";
    auto tree = SourceTree::load(dir);
    REQUIRE(tree.files().size() == 2);
    CHECK(tree.files()[0].path == "a.h");
    CHECK(tree.files()[0].role == FileRole::Header);
    CHECK(tree.files()[1].role == FileRole::Implementation);

    fs::path out = fs::temp_directory_path() / "ccopt_tree_rt_out";
    fs::remove_all(out);
    tree.render(out);
    CHECK(slurp(out / "a.h") == slurp(dir / "a.h"));
    CHECK(slurp(out / "sub/b.c") == slurp(dir / "sub/b.c"));
    fs::remove_all(dir);
    fs::remove_all(out);
}

TEST_CASE("identical rewrite leaves the tree unchanged") {
    SourceTree tree;
    tree.add("m.c", "int f(void){return 3;}\n");
    UpdateBlock block{BlockKind::FunctionRewrite, "f", "int f(void){return 3;}"};
    auto out = apply_patch(tree, {block});
    REQUIRE(out.rejected.empty());
    CHECK(out.tree.files()[0].text == tree.files()[0].text);

    // idempotence: applying twice equals applying once
    auto out2 = apply_patch(out.tree, {block});
    CHECK(out2.tree.files()[0].text == out.tree.files()[0].text);
}

TEST_CASE("member insert lands before the closing brace") {
    SourceTree tree;
    tree.add("s.h", "typedef struct {\n    int a;\n} QUIC_CONGESTION_CONTROL_BBR;\n");
    UpdateBlock block{BlockKind::StructMemberAdd, "QUIC_CONGESTION_CONTROL_BBR",
                      "uint64_t TotalLostBytes;"};
    auto out = apply_patch(tree, {block});
    REQUIRE(out.rejected.empty());
    const std::string& text = out.tree.files()[0].text;
    size_t member = text.find("uint64_t TotalLostBytes;");
    size_t close = text.find('}');
    REQUIRE(member != std::string::npos);
    CHECK(member < close);
    CHECK(validate_syntax(out.tree).empty());
}

TEST_CASE("missing target rejected, remaining blocks applied") {
    SourceTree tree;
    tree.add("m.c", "int f(void){return 1;}\nint g(void){return 2;}\n");
    std::vector<UpdateBlock> blocks = {
        {BlockKind::FunctionRewrite, "f", "int f(void){return 10;}"},
        {BlockKind::FunctionRewrite, "Nope", "int Nope(void){return 0;}"},
        {BlockKind::FunctionRewrite, "g", "int g(void){return 20;}"},
    };
    auto out = apply_patch(tree, blocks);
    REQUIRE(out.applied.size() == 2);
    REQUIRE(out.rejected.size() == 1);
    CHECK(out.rejected[0].block_index == 1);
    CHECK(out.rejected[0].reason == "NotFound");
    CHECK(out.tree.files()[0].text.find("return 10") != std::string::npos);
    CHECK(out.tree.files()[0].text.find("return 20") != std::string::npos);
}

TEST_CASE("empty block list is a no-op") {
    SourceTree tree;
    tree.add("m.c", "int f(void){return 1;}\n");
    auto out = apply_patch(tree, {});
    CHECK(out.applied.empty());
    CHECK(out.rejected.empty());
    CHECK(out.tree.files()[0].text == tree.files()[0].text);
}

TEST_CASE("applied rewrites keep top-level brace balance") {
    SourceTree tree;
    tree.add("m.c", "int f(void){if(1){return 1;}return 0;}\n");
    UpdateBlock block{BlockKind::FunctionRewrite, "f", "int f(void){\n    return 42;\n}"};
    auto out = apply_patch(tree, {block});
    REQUIRE(out.rejected.empty());
    auto mask = CodeMask::build(out.tree.files()[0].text);
    int depth = 0;
    for (size_t i = 0; i < out.tree.files()[0].text.size(); ++i) {
        if (!mask.is_code[i]) continue;
        char c = out.tree.files()[0].text[i];
        if (c == '{') ++depth;
        if (c == '}') --depth;
    }
    CHECK(depth == 0);
}

TEST_CASE("validate_syntax flags a deleted brace") {
    SourceTree tree;
    tree.add("ok.c", "int f(void){return 1;}\n");
    CHECK(validate_syntax(tree).empty());

    SourceTree broken;
    broken.add("bad.c", "int f(void){return 1;\n");
    auto v = validate_syntax(broken);
    REQUIRE(v.size() == 1);
    CHECK(v[0].path == "bad.c");
}

TEST_CASE("brace inside a string literal is fine") {
    SourceTree tree;
    tree.add("s.c", "const char* s = \"}}}\";\nint f(void){return 0;}\n");
    CHECK(validate_syntax(tree).empty());
}

TEST_CASE("unterminated comment is a violation") {
    SourceTree tree;
    tree.add("c.c", "int f(void){return 0;}\n/* drifting off...\n");
    auto v = validate_syntax(tree);
    REQUIRE(v.size() == 1);
    CHECK(v[0].message.find("comment") != std::string::npos);
}

TEST_CASE("loss-aware golden response applies cleanly to the source fixture") {
    auto tree = SourceTree::load("fixtures/bbr_src");
    REQUIRE(tree.files().size() == 2);
    auto parsed = parse_update_blocks(slurp("fixtures/loss_aware_response.md"));
    REQUIRE(parsed.errors.empty());
    REQUIRE(parsed.blocks.size() == 5);
    CHECK(parsed.blocks[0].kind == BlockKind::StructMemberAdd);

    auto out = apply_patch(tree, parsed.blocks);
    CHECK(out.rejected.empty());
    CHECK(out.applied.size() == 5);
    CHECK(validate_syntax(out.tree).empty());

    const SourceFile* h = out.tree.find("bbr.h");
    const SourceFile* c = out.tree.find("bbr.c");
    REQUIRE(h != nullptr);
    REQUIRE(c != nullptr);
    CHECK(h->text.find("uint64_t TotalLostBytes;") != std::string::npos);
    CHECK(h->text.find("uint64_t TotalSentBytes;") != std::string::npos);
    CHECK(h->text.find("double LossRate;") != std::string::npos);
    CHECK(c->text.find("Bbr->TotalSentBytes = NumRetransmittableBytes;") != std::string::npos);
    CHECK(c->text.find("(1.0 - Bbr->LossRate)") != std::string::npos);
}

TEST_CASE("truncated response rejects only the cut block") {
    auto parsed = parse_update_blocks(slurp("fixtures/loss_aware_truncated.md"));
    REQUIRE(parsed.errors.size() == 1);
    CHECK(parsed.errors[0].message == "unclosed fence");
    REQUIRE(parsed.blocks.size() >= 2);

    auto tree = SourceTree::load("fixtures/bbr_src");
    auto out = apply_patch(tree, parsed.blocks);
    CHECK(out.rejected.empty());
    CHECK(out.applied.size() == parsed.blocks.size());
    CHECK(validate_syntax(out.tree).empty());
}
