#pragma once

// Umbrella header: the full OTFDM link-level toolkit minus the JSON
// config loader (include otfdm/config_io.hpp separately for that).

#include "channel.hpp"
#include "chest.hpp"
#include "dft.hpp"
#include "grid.hpp"
#include "ldpc.hpp"
#include "qpsk.hpp"
#include "rng.hpp"
#include "rx.hpp"
#include "sim.hpp"
#include "waveform.hpp"
