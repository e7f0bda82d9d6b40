#include <doctest.h>

#include <sstream>

#include "fairpsm/csv.hpp"
#include "fairpsm/errors.hpp"

using namespace fairpsm;

TEST_CASE("parses quoted fields, embedded separators and CRLF") {
    std::istringstream in("a,b,c\r\n1,\"x,y\",\"he said \"\"hi\"\"\"\r\n2,\"line\nbreak\",z\n");
    const CsvTable t = parse_csv(in);
    REQUIRE(t.header == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1] == "x,y");
    CHECK(t.rows[0][2] == "he said \"hi\"");
    CHECK(t.rows[1][1] == "line\nbreak");
}

TEST_CASE("rejects ragged rows") {
    std::istringstream in("a,b\n1,2,3\n");
    CHECK_THROWS_AS(parse_csv(in), InputError);
}

TEST_CASE("ignores a trailing blank line") {
    std::istringstream in("a,b\n1,2\n\n");
    CHECK(parse_csv(in).rows.size() == 1);
}

TEST_CASE("column_index") {
    std::istringstream in("id,score\n1,0.5\n");
    const CsvTable t = parse_csv(in);
    CHECK(t.column_index("score") == 1);
    CHECK(t.column_index("missing") == -1);
}

TEST_CASE("write/parse round trip preserves awkward cells") {
    CsvTable t;
    t.header = {"name", "note"};
    t.rows = {{"a,b", "say \"x\""}, {"plain", "line\ntwo"}};
    std::ostringstream out;
    write_csv(out, t);
    std::istringstream in(out.str());
    const CsvTable back = parse_csv(in);
    CHECK(back.header == t.header);
    CHECK(back.rows == t.rows);
}
