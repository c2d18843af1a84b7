#include <gtest/gtest.h>

#include <sstream>

#include "annoserve/config.hpp"
#include "annoserve/gallery.hpp"
#include "annoserve/wizard.hpp"
#include "support.hpp"

using namespace annoserve;
using annoserve::testing::TempDir;

namespace {

std::vector<std::string> radio_answers(const std::string& options) {
  return {"Sentiment", "data.csv", "", "text", "", "1",
          "sentiment", "radio", "", options, "n", "",
          "", "", "", "", "", "", "n", "", "", "", "", ""};
}

}  // namespace

TEST(Wizard, OneRadioScheme) {
  TempDir dir;
  ScriptedPrompts prompts(radio_answers("pos, neg"));
  const auto result = run_config_wizard(prompts, dir.path());
  EXPECT_EQ(prompts.consumed(), prompts.prompts().size());
  const auto reloaded = parse_config(result.yaml, dir.path(), false);
  ASSERT_EQ(reloaded.schemes.size(), 1u);
  EXPECT_EQ(reloaded.schemes[0].options.size(), 2u);
  EXPECT_EQ(reloaded.schemes[0].options[1].value, "neg");
  EXPECT_EQ(reloaded, result.config);
}

TEST(Wizard, EmptyLabelListFailsWhenScripted) {
  TempDir dir;
  ScriptedPrompts prompts(radio_answers(""));
  EXPECT_THROW(run_config_wizard(prompts, dir.path()), WizardError);
}

TEST(Wizard, EmptyLabelListRepromptsInteractively) {
  TempDir dir;
  // insert a corrected answer right after the empty options line
  const auto answers = radio_answers("");
  std::string fixed;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    fixed += answers[i] + "\n";
    if (i == 9) fixed += "pos, neg\n";
  }
  std::istringstream in(fixed);
  std::ostringstream out;
  StreamPrompts prompts(in, out);
  const auto result = run_config_wizard(prompts, dir.path());
  EXPECT_EQ(result.config.schemes[0].options.size(), 2u);
  EXPECT_NE(out.str().find("at least one"), std::string::npos) << out.str();
}

TEST(Wizard, ReproducesTask2Template) {
  const auto dir = annoserve::testing::templates_dir() / "task2_short_doc";
  const auto expected = load_config(dir / "config.yaml");
  ScriptedPrompts prompts(read_answer_file(dir / "wizard_answers.txt"));
  const auto result = run_config_wizard(prompts, dir);
  EXPECT_EQ(prompts.consumed(), read_answer_file(dir / "wizard_answers.txt").size());
  EXPECT_EQ(result.config, expected);
  EXPECT_EQ(parse_config(result.yaml, dir, true), expected);
}

TEST(Wizard, AnswerFileSkipsComments) {
  TempDir dir;
  annoserve::testing::write_text(dir / "a.txt", "# comment\nfirst\n\nthird\n");
  EXPECT_EQ(read_answer_file(dir / "a.txt"), (std::vector<std::string>{"first", "", "third"}));
}

TEST(Gallery, CatalogListsNineTemplates) {
  const auto entries = list_templates(annoserve::testing::templates_dir());
  ASSERT_EQ(entries.size(), 9u);
  for (const auto& e : entries) {
    EXPECT_TRUE(std::filesystem::exists(e.config_file)) << e.id;
    EXPECT_TRUE(std::filesystem::exists(e.data_file)) << e.id;
  }
}

TEST(Gallery, ScaffoldCopiesAndLoads) {
  TempDir dir;
  const auto cfg = scaffold("pairwise", dir / "proj", annoserve::testing::templates_dir());
  const auto c = load_config(cfg);
  EXPECT_EQ(c.template_text.find("{{ text_a }}") != std::string::npos, true);
  EXPECT_THROW(scaffold("pairwise", dir / "proj", annoserve::testing::templates_dir()), GalleryError);
  EXPECT_THROW(scaffold("nope", dir / "other", annoserve::testing::templates_dir()), GalleryError);
}
