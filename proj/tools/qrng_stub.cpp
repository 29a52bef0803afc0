// Local quantum-service stand-in: serves /API/jsonI.php?length=N&type=uint8.
#include <iostream>

#include "CLI11.hpp"
#include "qrc/stub_server.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Stub quantum random number server"};
    std::string host = "127.0.0.1";
    int port = 8099;
    std::uint64_t seed = 1;
    std::string mode = "seeded";
    app.add_option("--host", host, "Bind address");
    app.add_option("--port", port, "Port");
    app.add_option("--seed", seed, "Seed for the served bytes");
    app.add_option("--mode", mode, "seeded, sequence, http_error, unsuccessful or malformed")
        ->check(CLI::IsMember({"seeded", "sequence", "http_error", "unsuccessful", "malformed"}));
    CLI11_PARSE(app, argc, argv);

    using Mode = qrc::StubQrngServer::Mode;
    const Mode m = mode == "sequence"       ? Mode::sequence
                   : mode == "http_error"   ? Mode::http_error
                   : mode == "unsuccessful" ? Mode::unsuccessful
                   : mode == "malformed"    ? Mode::malformed
                                            : Mode::seeded;
    qrc::StubQrngServer server(m, seed);
    std::cout << "serving on http://" << host << ":" << port << "/API/jsonI.php" << std::endl;
    try {
        server.listen(host, port);
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    return 0;
}
