"""Asset registry: the 61 analysed cryptocurrencies with their sectors."""
from __future__ import annotations

import csv
from importlib import resources
from pathlib import Path

from .ingest.types import AssetSpec

SECTORS = frozenset({
    "Advertising", "Asset Management", "Currencies", "Data Management",
    "Decentralized Exchanges", "Derivatives", "File Storage", "Gaming", "Identity",
    "Interoperability", "Lending", "Other", "Payment Platforms", "Scaling",
    "Shared Compute", "Smart Contract Platforms", "Social Media", "Stablecoins",
    "Virtual And Augmented Reality",
})


def load_registry(path: str | Path | None = None) -> list[AssetSpec]:
    """Read a ``symbol,name,sector`` CSV; the bundled 61-asset table when ``path`` is None."""
    if path is None:
        text = resources.files("crashnet").joinpath("data/assets.csv").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    reader = csv.DictReader(text.splitlines())
    if reader.fieldnames != ["symbol", "name", "sector"]:
        raise ValueError(f"registry header must be symbol,name,sector; got {reader.fieldnames}")
    assets, seen = [], set()
    for row in reader:
        spec = AssetSpec(row["symbol"].strip(), row["name"].strip(), row["sector"].strip())
        if spec.symbol in seen:
            raise ValueError(f"duplicate registry symbol {spec.symbol}")
        if spec.sector not in SECTORS:
            raise ValueError(f"{spec.symbol}: unknown sector {spec.sector!r}")
        seen.add(spec.symbol)
        assets.append(spec)
    return assets


def symbols_in_sectors(registry, sectors) -> list[str]:
    wanted = set(sectors)
    return [a.symbol for a in registry if a.sector in wanted]
