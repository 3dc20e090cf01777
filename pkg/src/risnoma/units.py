"""Decibel conversions used at the configuration boundary."""

from __future__ import annotations

import math


def db_to_linear(db: float) -> float:
    # -inf dB maps to an exact zero (e.g. perfect SI cancellation)
    if db == -math.inf:
        return 0.0
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    if x == 0.0:
        return -math.inf
    return 10.0 * math.log10(x)


def dbm_to_watts(dbm: float) -> float:
    return db_to_linear(dbm - 30.0)


def watts_to_dbm(w: float) -> float:
    return linear_to_db(w) + 30.0
