// Copyright (c) 2026 The autosec authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "autosec/attackgraph.hpp"
#include "autosec/campaign.hpp"
#include "autosec/errors.hpp"
#include "autosec/fingerprint.hpp"
#include "autosec/keyvalue.hpp"
#include "autosec/mitigate.hpp"
#include "autosec/model.hpp"
#include "autosec/version.hpp"
#include "autosec/vulndb.hpp"
