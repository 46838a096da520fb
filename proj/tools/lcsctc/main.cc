// lcsctc: command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 data or validation error.

#include <iostream>
#include <utility>
#include <vector>

#include "common.h"
#include "lcsctc/errors.h"

int main(int argc, char **argv) {
  using namespace lcsctc::cli;

  CLI::App app{"LCS-constrained CTC toolkit", "lcsctc"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--phoneme-table", g.phoneme_table,
                 "Phoneme profile table replacing the built-in one")
      ->check(CLI::ExistingFile);

  std::vector<std::pair<CLI::App *, Handler>> commands;
  auto add = [&](Handler (*fn)(CLI::App &, const GlobalOptions &)) {
    Handler h = fn(app, g);
    commands.emplace_back(app.get_subcommands({}).back(), std::move(h));
  };
  add(AddTarget);
  add(AddAlign);
  add(AddLoss);
  add(AddGradCheck);
  add(AddDecode);
  add(AddEval);
  add(AddTrainToy);
  add(AddEvalToy);
  add(AddGenSynth);
  add(AddTolSweep);
  add(AddEmissionsDump);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 1;
  }

  try {
    for (auto &[sub, handler] : commands)
      if (sub->parsed()) handler();
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const lcsctc::Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
