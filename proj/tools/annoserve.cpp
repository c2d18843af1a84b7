// Command-line entry point: start, init, validate, export, templates, scaffold.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>

#include "annoserve/config.hpp"
#include "annoserve/export.hpp"
#include "annoserve/gallery.hpp"
#include "annoserve/ingest.hpp"
#include "annoserve/persistence.hpp"
#include "annoserve/server.hpp"
#include "annoserve/wizard.hpp"

namespace {

annoserve::AnnotationServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

void print_issues(const annoserve::ConfigError& e, const std::string& path) {
  for (const auto& issue : e.issues()) std::cerr << path << ": " << annoserve::format_issue(issue) << "\n";
}

std::filesystem::path write_wizard_output(const annoserve::WizardResult& result, const std::filesystem::path& out) {
  annoserve::write_file_atomic(out, result.yaml);
  return out;
}

int cmd_start(std::string config_path) {
  using namespace annoserve;
  if (config_path.empty()) {
    std::cout << "No config given; starting the setup wizard.\n";
    StreamPrompts prompts(std::cin, std::cout);
    const auto result = run_config_wizard(prompts, std::filesystem::current_path());
    config_path = write_wizard_output(result, "config.yaml").string();
    std::cout << "Wrote " << config_path << "\n";
  }
  auto config = load_config(config_path);
  apply_env_overrides(config);
  InstanceStore store(load_instances(config));
  AnnotationServer server(config, std::move(store));
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const int port = server.bind(config.server.host, config.server.port);
  std::cout << "Serving '" << config.task_name << "' (" << server.sessions().store().size() << " instances) on http://"
            << config.server.host << ":" << port << "/\n"
            << std::flush;
  server.run();
  server.sessions().wait_learning();
  server.sessions().checkpoint();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace annoserve;
  CLI::App app{"annoserve: self-hosted annotation server"};
  app.require_subcommand(1);

  std::string start_config;
  auto* start = app.add_subcommand("start", "serve a task (runs the wizard when no config is given)");
  start->add_option("config", start_config, "task config file");

  std::string answers_file;
  std::string init_out = "config.yaml";
  auto* init = app.add_subcommand("init", "create a task config by answering prompts");
  init->add_option("--answers", answers_file, "scripted answers, one per line");
  init->add_option("--out", init_out, "where to write the config");

  std::string validate_config_path;
  auto* validate = app.add_subcommand("validate", "check a task config; exit 0 when valid, 1 otherwise");
  validate->add_option("config", validate_config_path, "task config file")->required();

  std::string export_config;
  std::string export_format = "jsonl";
  std::string export_out;
  auto* exp = app.add_subcommand("export", "export recorded annotations");
  exp->add_option("config", export_config, "task config file")->required();
  exp->add_option("--format", export_format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));
  exp->add_option("--out", export_out, "output directory (default <output_dir>/export)");

  auto* templates = app.add_subcommand("templates", "list shipped task templates");

  std::string scaffold_id;
  std::string scaffold_dir;
  auto* scaffold_cmd = app.add_subcommand("scaffold", "copy a template into a new task directory");
  scaffold_cmd->add_option("template", scaffold_id, "template id")->required();
  scaffold_cmd->add_option("dir", scaffold_dir, "target directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*start) return cmd_start(start_config);

    if (*init) {
      std::unique_ptr<PromptStream> prompts;
      if (answers_file.empty()) {
        prompts = std::make_unique<StreamPrompts>(std::cin, std::cout);
      } else {
        prompts = std::make_unique<ScriptedPrompts>(read_answer_file(answers_file));
      }
      const auto out = std::filesystem::absolute(init_out);
      const auto result = run_config_wizard(*prompts, out.parent_path());
      write_wizard_output(result, out);
      std::cout << "Wrote " << out.string() << "\n";
      return 0;
    }

    if (*validate) {
      try {
        const auto config = load_config(validate_config_path);
        for (const auto& w : config_warnings(config)) {
          std::cerr << validate_config_path << ": warning: " << format_issue(w) << "\n";
        }
        const auto instances = load_instances(config);
        std::cout << validate_config_path << ": ok (" << config.schemes.size() << " schemes, " << config.label_count()
                  << " labels, " << instances.size() << " instances)\n";
        return 0;
      } catch (const ConfigError& e) {
        print_issues(e, validate_config_path);
      } catch (const IngestError& e) {
        std::cerr << validate_config_path << ": " << e.what() << "\n";
      }
      return 1;
    }

    if (*exp) {
      auto config = load_config(export_config);
      apply_env_overrides(config);
      InstanceStore store(load_instances(config));
      SessionOptions options;
      options.background_learning = false;
      SessionManager sessions(config, std::move(store), options);
      const auto dir = export_out.empty() ? config.resolve(config.server.output_dir) / "export"
                                          : std::filesystem::path(export_out);
      const auto result =
          export_annotations(sessions.annotation_store(), config, *parse_export_format(export_format), dir);
      for (const auto& f : result.files) std::cout << f.string() << "\n";
      std::cout << result.records << " annotation records\n";
      return 0;
    }

    if (*templates) {
      for (const auto& t : list_templates()) std::cout << t.id << "\t" << t.description << "\n";
      return 0;
    }

    if (*scaffold_cmd) {
      const auto config = scaffold(scaffold_id, scaffold_dir);
      std::cout << "Created " << config.string() << "\nRun: annoserve start " << config.string() << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    print_issues(e, "config");
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
