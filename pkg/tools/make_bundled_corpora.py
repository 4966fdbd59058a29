"""Regenerate the text corpora shipped under src/sidr/data/.

Deterministic: composes short topic-flavored documents from fixed word
pools with a seeded RNG. Run from the repo root:

    python tools/make_bundled_corpora.py
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

TOPICS = {
    "tidepool": {
        "nouns": ["kelp", "anemone", "urchin", "tide", "plankton", "reef", "barnacle",
                  "crab", "salinity", "current", "shoal", "estuary"],
        "verbs": ["drifts", "anchors", "filters", "spawns", "clings", "recedes",
                  "floods", "settles"],
        "adjs": ["briny", "intertidal", "submerged", "turbid", "saline", "benthic",
                 "littoral", "brackish"],
    },
    "telescope": {
        "nouns": ["nebula", "parallax", "aperture", "quasar", "transit", "eclipse",
                  "magnitude", "spectrum", "orbit", "perihelion", "occultation", "albedo"],
        "verbs": ["occludes", "redshifts", "transits", "collimates", "flares",
                  "precesses", "radiates", "dims"],
        "adjs": ["sidereal", "stellar", "photometric", "orbital", "celestial",
                 "lunar", "galactic", "spectral"],
    },
    "bakery": {
        "nouns": ["sourdough", "crumb", "proofing", "gluten", "starter", "hydration",
                  "oven", "scoring", "levain", "fermentation", "crust", "poolish"],
        "verbs": ["rises", "ferments", "bakes", "folds", "browns", "rests",
                  "stretches", "collapses"],
        "adjs": ["airy", "crusty", "floured", "overnight", "caramelized", "tangy",
                 "lukewarm", "elastic"],
    },
    "velodrome": {
        "nouns": ["cadence", "sprocket", "breakaway", "derailleur", "peloton", "crank",
                  "drafting", "sprint", "gradient", "saddle", "tempo", "chainring"],
        "verbs": ["accelerates", "shifts", "corners", "attacks", "spins", "climbs",
                  "coasts", "surges"],
        "adjs": ["aerodynamic", "banked", "steep", "tubular", "punchy", "smooth",
                 "fatigued", "tactical"],
    },
    "ledger": {
        "nouns": ["invoice", "liability", "dividend", "audit", "margin", "accrual",
                  "portfolio", "forecast", "equity", "balance", "quarter", "yield"],
        "verbs": ["reconciles", "depreciates", "compounds", "hedges", "amortizes",
                  "settles", "accrues", "rebalances"],
        "adjs": ["fiscal", "quarterly", "leveraged", "liquid", "deferred", "audited",
                 "nominal", "net"],
    },
    "orchestra": {
        "nouns": ["cadenza", "woodwind", "crescendo", "overture", "timbre", "libretto",
                  "ostinato", "tempo", "motif", "sonata", "rehearsal", "downbeat"],
        "verbs": ["modulates", "swells", "resolves", "syncopates", "tunes",
                  "conducts", "phrases", "sustains"],
        "adjs": ["chromatic", "legato", "resonant", "muted", "orchestral", "tonal",
                 "staccato", "lyrical"],
    },
}

GLUE_NOUNS = ["morning", "season", "survey", "notebook", "report", "afternoon", "week"]
CONNECTORS = ["while", "before", "after", "although", "because", "until"]

TEMPLATES = [
    "The {adj} {n1} {v1} near the {n2} {conn} the {n3} {v2}.",
    "A {adj} {n1} {v1} during the {glue}.",
    "Field notes describe how the {n1} {v1} {conn} the {adj2} {n2} {v2}.",
    "Every {glue} the {n1} {v1} and the {n2} stays {adj}.",
    "Observers recorded a {adj} {n1} that {v1} beside the {n2}.",
    "The {n1} {v1} slowly, {conn} the {adj} {n2} {v2} again.",
]


def make_doc(rng: np.random.Generator, topic: str, sentences: int) -> str:
    pool = TOPICS[topic]
    parts = []
    for _ in range(sentences):
        tpl = TEMPLATES[rng.integers(len(TEMPLATES))]
        words = {
            "n1": pool["nouns"][rng.integers(len(pool["nouns"]))],
            "n2": pool["nouns"][rng.integers(len(pool["nouns"]))],
            "n3": pool["nouns"][rng.integers(len(pool["nouns"]))],
            "v1": pool["verbs"][rng.integers(len(pool["verbs"]))],
            "v2": pool["verbs"][rng.integers(len(pool["verbs"]))],
            "adj": pool["adjs"][rng.integers(len(pool["adjs"]))],
            "adj2": pool["adjs"][rng.integers(len(pool["adjs"]))],
            "glue": GLUE_NOUNS[rng.integers(len(GLUE_NOUNS))],
            "conn": CONNECTORS[rng.integers(len(CONNECTORS))],
        }
        parts.append(tpl.format(**words))
    return " ".join(parts)


def write_corpus(path: Path, topics: list[str], class_sizes: list[int], seed: int) -> None:
    rng = np.random.default_rng(seed)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        idx = 0
        for label, (topic, size) in enumerate(zip(topics, class_sizes)):
            for _ in range(size):
                doc = {
                    "id": f"{topic}-{idx:04d}",
                    "text": make_doc(rng, topic, sentences=int(rng.integers(2, 5))),
                    "label": label,
                    "vector": None,
                }
                fh.write(json.dumps(doc) + "\n")
                idx += 1
    print(f"wrote {path}")


def main() -> None:
    data = Path(__file__).resolve().parent.parent / "src" / "sidr" / "data"
    write_corpus(
        data / "articles4.jsonl",
        ["tidepool", "telescope", "bakery", "velodrome"],
        [15, 13, 23, 11],
        seed=41,
    )
    write_corpus(
        data / "notes3.jsonl",
        ["ledger", "orchestra", "tidepool"],
        [67, 67, 67],
        seed=42,
    )


if __name__ == "__main__":
    main()
