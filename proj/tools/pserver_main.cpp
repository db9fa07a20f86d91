#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "CLI11.hpp"

#include "grembed/ps_server.hpp"

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);

  CLI::App app{"embedding parameter server: one table slice behind a TCP port"};
  grembed::ServerConfig cfg;
  unsigned vtype = 0;
  std::string dtype = "f32";
  unsigned port = 0;
  std::string port_file;
  app.add_option("--vtype", vtype, "vertex type index")->required();
  app.add_option("--label", cfg.label, "vertex type label");
  app.add_option("--row-begin", cfg.row_begin, "first row held (inclusive)")->required();
  app.add_option("--row-end", cfg.row_end, "one past the last row held")->required();
  app.add_option("--dim", cfg.dim, "embedding dimension")->required();
  app.add_option("--dtype", dtype, "f32|f64")->check(CLI::IsMember({"f32", "f64"}));
  app.add_option("--seed", cfg.seed, "init seed, shared by every slice of this type");
  app.add_option("--port", port, "TCP port; 0 picks an ephemeral one");
  app.add_option("--port-file", port_file, "write the bound port here once listening");
  CLI11_PARSE(app, argc, argv);

  try {
    cfg.vtype = static_cast<std::uint8_t>(vtype);
    cfg.dtype = dtype == "f64" ? grembed::Dtype::f64 : grembed::Dtype::f32;
    grembed::PsServer server(cfg);
    std::uint16_t bound = server.listen(static_cast<std::uint16_t>(port));
    if (!port_file.empty()) {
      // Rename a finished temp file into place so readers never see a partial
      // write.
      std::string tmp = port_file + ".tmp";
      {
        std::ofstream f(tmp);
        f << bound << '\n';
      }
      std::filesystem::rename(tmp, port_file);
    }
    std::fprintf(stderr, "pserver %s[%llu,%llu) dim=%u listening on %u\n", cfg.label.c_str(),
                 static_cast<unsigned long long>(cfg.row_begin),
                 static_cast<unsigned long long>(cfg.row_end), cfg.dim, bound);
    server.run();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pserver: %s\n", e.what());
    return 1;
  }
  return 0;
}
