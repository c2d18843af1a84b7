#include <gtest/gtest.h>

#include "annoserve/ingest.hpp"
#include "support.hpp"

using namespace annoserve;
using annoserve::testing::TempDir;
using annoserve::testing::write_text;

namespace {

TaskConfig config_for(const TempDir& dir, const std::string& files, const std::string& text_field,
                      const std::string& extra = {}) {
  return parse_config("task_name: t\ndata_files: " + files + "\nid_field: id\ntext_field: " + text_field +
                          "\nschemes: [{name: s, kind: radio, options: [a, b]}]\n" + extra,
                      dir.path(), false);
}

}  // namespace

TEST(Ingest, ThreeLineRecords) {
  TempDir dir;
  write_text(dir / "d.jsonl", "{\"id\": \"1\", \"text\": \"a\"}\n\n{\"id\": \"2\", \"text\": \"b\"}\n{\"id\": 3, \"text\": \"c\"}\n");
  const auto inst = load_instances(config_for(dir, "[d.jsonl]", "text"));
  ASSERT_EQ(inst.size(), 3u);
  EXPECT_EQ(inst[2].id, "3");
  EXPECT_EQ(inst[0].shape, ContentShape::single);
  EXPECT_EQ(inst[0].documents[0].payload, "a");
}

TEST(Ingest, PairBecomesNamedMap) {
  TempDir dir;
  write_text(dir / "d.csv", "id,text_a,text_b,source\n1,left,right,web\n");
  const auto inst = load_instances(config_for(dir, "[d.csv]", "[text_a, text_b]"));
  ASSERT_EQ(inst.size(), 1u);
  EXPECT_EQ(inst[0].shape, ContentShape::map);
  EXPECT_EQ(inst[0].keys, (std::vector<std::string>{"text_a", "text_b"}));
  EXPECT_EQ(inst[0].documents[1].payload, "right");
  EXPECT_EQ(inst[0].display_meta.at("source"), "web");
}

TEST(Ingest, ListFieldBecomesList) {
  TempDir dir;
  write_text(dir / "d.jsonl", R"({"id": "x", "turns": ["hi", "hello", "bye"], "n": 3})" "\n");
  const auto inst = load_instances(config_for(dir, "[d.jsonl]", "turns"));
  EXPECT_EQ(inst[0].shape, ContentShape::list);
  EXPECT_EQ(inst[0].keys, (std::vector<std::string>{"0", "1", "2"}));
  EXPECT_EQ(inst[0].display_meta.at("n"), "3");
}

TEST(Ingest, DelimitedQuoting) {
  const auto recs = read_delimited("id,text\n1,\"a, \"\"b\"\"\nc\"\r\n2,plain\n", ',', "f.csv");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].fields["text"], "a, \"b\"\nc");
  EXPECT_EQ(recs[1].location, "f.csv:4");
  EXPECT_EQ(delimited_escape("a,\"b\"", ','), "\"a,\"\"b\"\"\"");
  EXPECT_EQ(delimited_escape("plain", ','), "plain");
}

TEST(Ingest, Errors) {
  TempDir dir;
  write_text(dir / "a.jsonl", "{\"id\": \"1\", \"text\": \"a\"}\n");
  write_text(dir / "b.csv", "id,text\n2,b\n1,c\n");
  try {
    load_instances(config_for(dir, "[a.jsonl, b.csv]", "text"));
    FAIL();
  } catch (const IngestError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("a.jsonl:1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("b.csv:3"), std::string::npos) << msg;
  }
  write_text(dir / "c.jsonl", "{\"id\": \"1\", \"text\": \"a\"}\n{\"text\": \"b\"}\n");
  EXPECT_THROW(load_instances(config_for(dir, "[c.jsonl]", "text")), IngestError);
  write_text(dir / "d.jsonl", "{\"id\": \"1\", \"text\": \"a\"}\n{oops\n");
  try {
    load_instances(config_for(dir, "[d.jsonl]", "text"));
    FAIL();
  } catch (const IngestError& e) {
    EXPECT_NE(std::string(e.what()).find("d.jsonl:2"), std::string::npos);
  }
  EXPECT_THROW(read_delimited("id,text\n1,\"open\n", ',', "x"), IngestError);
  EXPECT_THROW(read_delimited("id,text\n1,a,b\n", ',', "x"), IngestError);
  EXPECT_THROW(read_delimited("id,text\n1,\xff\n", ',', "x"), IngestError);
}

TEST(Ingest, ImageReferences) {
  TempDir dir;
  write_text(dir / "img.png", "png");
  write_text(dir / "d.csv", "id,image\n1,https://example.org/a.jpg\n2,img.png\n");
  const auto c = config_for(dir, "[d.csv]", "image", "image_fields: [image]\n");
  const auto inst = load_instances(c);
  EXPECT_EQ(inst[0].documents[0].kind, DocumentKind::image_ref);
  EXPECT_EQ(inst[1].document_length(0), 0u);
  write_text(dir / "d.csv", "id,image\n1,missing.png\n");
  EXPECT_THROW(load_instances(c), IngestError);
}

TEST(Ingest, TsvMatchesCsv) {
  TempDir dir;
  write_text(dir / "d.csv", "id,text\n1,\"tab\there\"\n2,é\n");
  const auto csv = load_instances(config_for(dir, "[d.csv]", "text"));
  write_text(dir / "d.tsv", "id\ttext\n1\t\"tab\there\"\n2\té\n");
  const auto tsv = load_instances(config_for(dir, "[d.tsv]", "text"));
  EXPECT_EQ(csv, tsv);
}
