// Hosts a toy world behind the newline-delimited JSON backend protocol so
// the vmdiff CLI can exercise --backend remote:HOST:PORT end to end.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vmdiff/toy_backend.hpp"
#include "vmdiff/wire.hpp"

int main(int argc, char** argv) {
  CLI::App app{"vmdiff-backend-server: serve a toy world over TCP"};
  std::string world = "toy2";
  std::string host = "127.0.0.1";
  int port = 7464;
  int t_max = 999;
  app.add_option("--world", world, "world json path or built-in name");
  app.add_option("--host", host, "listen address");
  app.add_option("--port", port, "listen port (0 picks a free port)");
  app.add_option("--t-max", t_max, "t_max the sigma grid is defined against");
  CLI11_PARSE(app, argc, argv);

  try {
    vmdiff::ToyWorld w = (world == "toy2" || world == "default" || world == "toy-asym" ||
                          world == "toy16")
                             ? vmdiff::ToyWorld::by_name(world)
                             : vmdiff::ToyWorld::load_file(world);
    vmdiff::ToyBackend backend(std::move(w), t_max);
    vmdiff::TcpBackendServer server(backend);
    const int bound = server.bind_and_listen(host, port);
    std::cout << "listening on " << host << ":" << bound << std::endl;
    server.serve();
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
