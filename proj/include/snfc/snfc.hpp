// Copyright 2026 The snfc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "snfc/auth.hpp"
#include "snfc/bench.hpp"
#include "snfc/bytes.hpp"
#include "snfc/codec.hpp"
#include "snfc/crypto/aes.hpp"
#include "snfc/crypto/hmac.hpp"
#include "snfc/crypto/modes.hpp"
#include "snfc/crypto/random.hpp"
#include "snfc/crypto/suite.hpp"
#include "snfc/device.hpp"
#include "snfc/endpoints.hpp"
#include "snfc/error.hpp"
#include "snfc/fixture.hpp"
#include "snfc/scenario.hpp"
#include "snfc/session.hpp"
#include "snfc/transport.hpp"
