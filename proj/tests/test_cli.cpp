#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

struct Run {
    int code = -1;
    std::string out;
};

// runs the CLI with stderr folded into the captured output
Run cli(const std::string& args) {
    Run r;
    const std::string cmd = std::string(GTFK_CLI_PATH) + " " + args + " 2>&1";
    FILE* p = ::popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, p)) r.out += buf;
    const int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string temp_path(const std::string& name) { return ::testing::TempDir() + name; }

}  // namespace

TEST(Cli, BondCsvOnStdout) {
    const auto r = cli("bond --model bk --a 0.1 --b -3.2188758248682006 --sigma 0.85 --y0 0.06 --T 1");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("T,value,err_estimate,method"), std::string::npos);
    EXPECT_NE(r.out.find("1,0.9331"), std::string::npos) << r.out;
}

TEST(Cli, ConfigFileAndSidecar) {
    const std::string cfg = temp_path("vas.cfg"), out = temp_path("vas_bond.csv");
    std::ofstream(cfg) << "model = vasicek\na = 0.1\nb = 0.05\nsigma = 0.02\nlambda = 1\ny0 = 0.03\n";
    const auto r = cli("bond --config " + cfg + " --method exact --T 1 --T 5 --out " + out);
    ASSERT_EQ(r.code, 0) << r.out;
    std::ifstream csv(out);
    std::stringstream text;
    text << csv.rdbuf();
    EXPECT_NE(text.str().find(",exact"), std::string::npos);
    std::ifstream side(out + ".json");
    const auto meta = nlohmann::json::parse(side);
    EXPECT_EQ(meta["spec"]["model"], "vasicek");
    EXPECT_EQ(meta["results"].size(), 2u);
    EXPECT_EQ(meta["exit_code"], 0);
}

TEST(Cli, JsonFormat) {
    const auto r = cli("density --model vasicek --a 0.1 --b 0 --sigma 0.02 --y0 0.03 --T 2 --points 5 --method exact "
                       "--format json");
    ASSERT_EQ(r.code, 0) << r.out;
    const auto doc = nlohmann::json::parse(r.out);
    EXPECT_EQ(doc["results"][0]["method"], "exact");
    EXPECT_EQ(doc["results"][0]["psi"].size(), 5u);
}

TEST(Cli, DensityCompareColumn) {
    const auto r = cli("density --model bk --a 0.1 --b -3.2188758248682006 --sigma 0.85 --y0 0.06 --T 1 --points 4 "
                       "--compare-pde");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("T,y,psi_gtfk,psi_pde"), std::string::npos);
}

TEST(Cli, SelfConsistentFlagsBreakdownRows) {
    const auto r = cli("selfconsistent --model bk --a 0.001 --b -3.2 --sigma 3 --lambda -1 --y0 0.06 --T 10 --points 9");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("breakdown"), std::string::npos);
    EXPECT_NE(r.out.find("xbar,omega2,alpha,w,rho_diag,status"), std::string::npos);
}

TEST(Cli, OracleRunsEveryEngine) {
    const auto r = cli("oracle --model vasicek --a 0.1 --b 0.05 --sigma 0.02 --y0 0.03 --T 1 --mc-paths 2000 "
                       "--conv-steps 32");
    ASSERT_EQ(r.code, 0) << r.out;
    for (const char* m : {",pde", ",convolution", ",mc"}) EXPECT_NE(r.out.find(m), std::string::npos) << m;
}

TEST(Cli, TableToleranceBreachExitsTwo) {
    const auto r = cli("table garch_bonds_2 --pde-n-space 21 --pde-n-time 4");
    EXPECT_EQ(r.code, 2) << r.out;
    EXPECT_NE(r.out.find("row T="), std::string::npos);
}

TEST(Cli, BranchBreakdownExitsThree) {
    const auto r = cli("bond --model bk --a 0.001 --b -3.2 --sigma 3 --lambda -1 --y0 0.06 --T 10");
    EXPECT_EQ(r.code, 3) << r.out;
    EXPECT_NE(r.out.find("branch breakdown"), std::string::npos);
    EXPECT_NE(r.out.find("xbar ="), std::string::npos);
}

TEST(Cli, BadInputExitsFour) {
    EXPECT_EQ(cli("bond --model bk --a 0.1 --b -3 --sigma 0.85 --y0 0.06 --T 1 --method exact").code, 4);
    EXPECT_EQ(cli("bond --model cir --a 0.1 --sigma 0.1 --y0 0.06 --T 1").code, 4);
    EXPECT_EQ(cli("bond --model garch --a 0.1 --b 0.04 --sigma 0.6 --T 1").code, 4);
    EXPECT_EQ(cli("bond --model garch --a 0.1 --b 0.04 --sigma 0.6 --y0 -1 --T 1").code, 4);
    EXPECT_EQ(cli("bond --model garch --a 0.1 --b 0.04 --sigma 0.6 --y0 0.06 --T 1 --format xml").code, 4);
    EXPECT_EQ(cli("bond --config /nonexistent.cfg --y0 0.06 --T 1").code, 4);
    EXPECT_EQ(cli("table table_iv").code, 4);
    EXPECT_EQ(cli("frobnicate").code, 4);
    EXPECT_EQ(cli("--help").code, 0);
}
