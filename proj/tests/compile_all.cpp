// Pulls every public header into one translation unit.
#include <doctest.h>

#include "nufab/arch.hpp"
#include "nufab/attack.hpp"
#include "nufab/bench.hpp"
#include "nufab/bitstream.hpp"
#include "nufab/config.hpp"
#include "nufab/errors.hpp"
#include "nufab/fabric.hpp"
#include "nufab/layout.hpp"
#include "nufab/mapper.hpp"
#include "nufab/netlist.hpp"
#include "nufab/placement.hpp"
#include "nufab/report.hpp"
#include "nufab/rng.hpp"
#include "nufab/sat.hpp"
#include "nufab/xml.hpp"

TEST_CASE("headers are self-contained")
{
    nufab::ArchTemplate t;
    CHECK(t.k == 4);
}
