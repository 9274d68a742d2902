#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace {

struct RunResult {
    int exit_code;
    std::string out;
};

RunResult run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd =
        env + (env.empty() ? "" : " ") + STEINKIT_CLI_PATH " " + args + " 2>&1";
    std::array<char, 4096> buf;
    std::string out;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    while (std::fgets(buf.data(), int(buf.size()), p)) out += buf.data();
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

} // namespace

TEST_CASE("kernel table: CSV shape and known values") {
    RunResult r = run_cli("kernel --dist student:nu=5 --grid -1:1:1");
    CHECK(r.exit_code == 0);
    CHECK(r.out.substr(0, 12) == "x,tau,score\n");
    CHECK(r.out.find("0,1.2499999999999998,-0") != std::string::npos);

    RunResult t =
        run_cli("kernel --dist table --pmf 0.5,0.5 --origin -1 --spacing 2");
    CHECK(t.exit_code == 0);
    CHECK(t.out.find("-1,0,0") != std::string::npos);
    CHECK(t.out.find("1,1,-1") != std::string::npos);
}

TEST_CASE("gaussian kernel column is constant") {
    RunResult r = run_cli("kernel --dist gaussian --param sigma2=1 --grid -2:2:1");
    CHECK(r.exit_code == 0);
    int rows = 0;
    std::size_t pos = r.out.find('\n'); // skip the header
    while (pos != std::string::npos && pos + 1 < r.out.size()) {
        const std::size_t c1 = r.out.find(',', pos + 1);
        REQUIRE(c1 != std::string::npos);
        const double tau = std::strtod(r.out.c_str() + c1 + 1, nullptr);
        CHECK(std::fabs(tau - 1.0) < 1e-12);
        ++rows;
        pos = r.out.find('\n', pos + 1);
    }
    CHECK(rows == 5);
}

TEST_CASE("runs are byte identical") {
    const std::string args = "case gauss-gauss --sigma1 1,2 --sigma2 1.5";
    RunResult a = run_cli(args);
    RunResult b = run_cli(args + " --jobs 4");
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("compare emits a schema-versioned JSON report") {
    RunResult r =
        run_cli("compare --a gaussian --b student:nu=10 --method kernel "
                "--metric tv");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"schema_version\": 1") != std::string::npos);
    CHECK(r.out.find("\"bound\": 0.500000") != std::string::npos);
    CHECK(r.out.find("oracle_distance") != std::string::npos);
}

TEST_CASE("identical inputs give a zero bound and zero distance") {
    RunResult r = run_cli(
        "compare --a gaussian:sigma2=1 --b gaussian:sigma2=1 --method score");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"bound\": 0.0") != std::string::npos);
    CHECK(r.out.find("\"oracle_distance\": 0.0") != std::string::npos);
}

TEST_CASE("score-method Gaussian pair reproduces the ratio bound") {
    RunResult r = run_cli(
        "compare --a gaussian --b gaussian:sigma2=4 --method score");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"bound\": 1.5") != std::string::npos);
}

TEST_CASE("solve emits the split solution") {
    RunResult r = run_cli(
        "solve --dist gaussian --z2 0 --fixed-f 1 --grid -1:1:0.5");
    CHECK(r.exit_code == 0);
    CHECK(r.out.substr(0, 16) == "x,h,f,g,product\n");
}

TEST_CASE("exit codes: parse, incompatibility, budget") {
    CHECK(run_cli("kernel --dist nosuchfamily").exit_code == 2);
    CHECK(run_cli("kernel --dist gaussian:sigma2=oops").exit_code == 2);
    CHECK(run_cli("kernel --nonsense-flag").exit_code == 2);
    // different means make the default comparison datum uncentered
    CHECK(run_cli("compare --a gaussian:mu=0 --b gaussian:mu=1 --method kernel")
              .exit_code == 3);
    CHECK(run_cli("case rademacher --n 100").exit_code == 4);
    CHECK(run_cli("kernel --dist gaussian", "STEINKIT_TOL=bogus").exit_code ==
          0); // tolerance env is only consulted where tolerances matter
    CHECK(run_cli("verify --suite oracles", "STEINKIT_TOL=bogus").exit_code ==
          2);
}

TEST_CASE("verify suites pass and report residuals") {
    RunResult r = run_cli("verify --suite operators");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("PASS operators") != std::string::npos);
    RunResult k = run_cli("verify --suite kernels --tol 1e-8");
    CHECK(k.exit_code == 0);
    CHECK(k.out.find("PASS kernels") != std::string::npos);
    RunResult bad = run_cli("verify --suite nosuchsuite");
    CHECK(bad.exit_code == 2);
}

TEST_CASE("case studies honor the documented sweep flags") {
    RunResult r = run_cli("case gumbel --n 2,10 --format csv");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("0.33333333333333331") != std::string::npos);
    CHECK(r.out.find("0.090909090909090912") != std::string::npos);

    RunResult j = run_cli("case exp-max-uniform --n 100 --t 0.5 "
                          "--eps 0,0.138,1 --format json");
    CHECK(j.exit_code == 0);
    CHECK(j.out.find("0.0049714") != std::string::npos);
    CHECK(j.out.find("0.0085203") != std::string::npos);
    CHECK(j.out.find("0.0048871") != std::string::npos);
}
