#ifndef TSDICT_TSDICT_HPP
#define TSDICT_TSDICT_HPP

// Umbrella header: pulls in the whole library.

#include "tsdict/errors.hpp"
#include "tsdict/series.hpp"
#include "tsdict/profiles.hpp"
#include "tsdict/dictionary.hpp"
#include "tsdict/dict_join.hpp"
#include "tsdict/io.hpp"

#endif // TSDICT_TSDICT_HPP
