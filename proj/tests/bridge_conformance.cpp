// Runs the bridge protocol suite against a worker.
//
//   bridge_conformance [address]
//
// The address is a worker command or tcp://host:port; ISOCHRONO_BRIDGE
// overrides it. Add --semantic to also run the behavioural checks.

#include "support/conformance.hpp"

#include "isochrono/bridge.hpp"

#include <iostream>
#include <string>
#include <string_view>

int main(int argc, char **argv) {
    std::string address;
    bool semantic = false;
    for (int i = 1; i < argc; ++i) {
        if (std::string_view(argv[i]) == "--semantic") {
            semantic = true;
        } else {
            address = argv[i];
        }
    }
    address = isochrono::resolve_bridge_address(address);
    if (address.empty()) {
        std::cerr << "usage: bridge_conformance [--semantic] <worker command | tcp://host:port>\n";
        return 2;
    }

    auto results = conformance::run_protocol_suite(address);
    if (semantic) {
        for (auto &r : conformance::run_semantic_suite(address)) results.push_back(std::move(r));
    }
    int failed = 0;
    for (const auto &r : results) {
        std::cout << (r.passed ? "PASS" : "FAIL") << "  " << r.name;
        if (!r.passed) std::cout << "  -- " << r.detail;
        std::cout << '\n';
        failed += r.passed ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
