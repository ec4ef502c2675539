"""Fixed-point money arithmetic and reproducible seed derivation."""

from __future__ import annotations

import hashlib


def cents(amount: float) -> int:
    """Round a money amount to integer hundredths.

    All costs are accrued in integer cents so that totals are exact,
    order-independent, and usable as dedup keys.
    """
    return round(amount * 100)


def money(cents_value: int) -> float:
    return cents_value / 100.0


def fmt_money(cents_value: int) -> str:
    return f"{cents_value / 100.0:.2f}"


def derive_seed(*parts) -> int:
    """Stable 32-bit seed mixed from arbitrary repr-able parts.

    Independent of process hash randomization, so parallel and serial
    runs derive identical child seeds.
    """
    digest = hashlib.sha256(repr(parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big")
