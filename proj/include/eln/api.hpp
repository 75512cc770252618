#pragma once

#include <memory>
#include <string>
#include <thread>

#include "eln/engine.hpp"

namespace httplib {
class Server;
}

namespace eln {

int http_status(ErrorCode code) noexcept;

// JSON over HTTP. Every handler serializes the result of one engine
// operation; failures answer {"error": {"code", "message"}}.
class ApiServer {
public:
    explicit ApiServer(Engine& engine);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    // Port 0 picks a free port. Returns the bound port.
    // Throws Error{port_in_use}.
    int bind(const std::string& host, int port);

    void listen();  // blocks until stop()
    void start();   // listens on a background thread
    void stop();

private:
    void routes();

    Engine& engine_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

}  // namespace eln
