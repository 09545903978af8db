#!/usr/bin/env python3
"""Generate the sports.test fixture corpus under fixtures/corpus/.

The corpus is committed; this script only exists to regenerate it.  Layout:

  index       hub page relevant to all three domains
  c000..c059  cricket pages, some also football (i%7==0) or hockey (i%11==0)
  f000..f059  football pages, some also hockey (i%9==0)
  h000..h059  hockey pages, some also football (i%8==0)
  x000..x019  pages relevant to nothing
  m000..m004  pages relevant to all three domains

Links keep every page reachable within a small tolerance from the hub in
any single-domain or combined crawl: topic chains c->c, f->f, h->h, plus
cross links c->f, f->h, h->c, c->x, c->m and x->c back references.
"""

from __future__ import annotations

import random
import re
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "fixtures" / "corpus" / "sports.test"

CRICKET_BASE = "The wicket fell early and another wicket followed as the bat drove hard."
FOOTBALL_BASE = (
    "A free kick opened play and another free kick sealed it. "
    "The corner count rose as the crowd sang."
)
HOCKEY_BASE = (
    "The hockey stick snapped and a spare hockey stick appeared. "
    "The defender wore fresh elbow pads."
)
ALPHA = "The ball rolled across the ground as one player turned."

CRICKET_EXTRAS = [
    "The test match resumed at dawn.",
    "A one day fixture follows.",
    "He was out to a sharp catch.",
    "The opener stayed not out till stumps.",
    "He held the crease all morning.",
    "The off stump cartwheeled away.",
]
FOOTBALL_EXTRAS = [
    "Play restarted from the centre circle.",
    "He drifted into the center.",
    "The club announced a new signing.",
    "The pitch held firm under rain.",
]
HOCKEY_EXTRAS = [
    "Field hockey resumed after the break.",
    "The equipments bag stayed zipped.",
    "The final ended in a draw.",
    "The umpire signalled quickly.",
    "A goal arrived before the horn.",
]
FILLER = [
    "Morning light settles across the quiet valley farms.",
    "The river bends past the stone mill below the bridge.",
    "Traders carry woven baskets toward the early market.",
    "Lanterns glow along the harbour wall after dusk.",
    "The librarian sorts returned volumes onto oak shelves.",
    "Travellers rest beneath the cedar trees at noon.",
    "Soft rain freshens the orchard paths before dawn.",
    "Bakers stack warm loaves behind the shop glass.",
    "The clockmaker winds each spring with careful turns.",
    "Snow lingers on the high passes into late spring.",
]

# Single-word terms and leading words of multi-word terms or synonyms; the
# filler pool must stay clear of all of them.
GUARD_WORDS = {
    "wicket", "bat", "crease", "out", "ball", "ground", "player", "pitch",
    "umpire", "not", "off", "test", "one", "national", "intra", "batting",
    "right", "50", "dismissed", "free", "goal", "centre", "corner", "club",
    "center", "crowd", "middle", "association", "area", "mass", "field",
    "hockey", "elbow", "equipments", "defender", "draw", "apparatus",
    "protector", "stick", "pads",
}


def check_filler() -> None:
    for sentence in FILLER:
        words = set(re.findall(r"\w+", sentence.lower()))
        hit = words & GUARD_WORDS
        assert not hit, f"filler sentence touches ontology terms {hit}: {sentence}"


def page(title: str, paragraphs: list[str], links: list[tuple[str, str]]) -> str:
    lines = ["<html>", f"<head><title>{title}</title></head>", "<body>"]
    lines += [f"<p>{p}</p>" for p in paragraphs]
    if links:
        anchors = " ".join(f'<a href="{href}">{label}</a>' for href, label in links)
        lines.append(f"<p>{anchors}</p>")
    lines += ["</body>", "</html>", ""]
    return "\n".join(lines)


def main() -> None:
    check_filler()
    rng = random.Random(20240817)
    ROOT.mkdir(parents=True, exist_ok=True)
    for stale in ROOT.glob("*.html"):
        stale.unlink()

    def filler(k: int) -> list[str]:
        return rng.sample(FILLER, k)

    pages: dict[str, str] = {}

    pages["index.html"] = page(
        "Sports desk",
        [CRICKET_BASE, FOOTBALL_BASE, HOCKEY_BASE, ALPHA] + filler(1),
        [
            ("c000.html", "cricket desk"),
            ("f000.html", "football desk"),
            ("h000.html", "hockey desk"),
            ("x000.html", "town notes"),
            ("m000.html", "weekend roundup"),
        ],
    )

    for i in range(60):
        body = [CRICKET_BASE] + rng.sample(CRICKET_EXTRAS, rng.randint(1, 2)) + [ALPHA]
        if i % 7 == 0:
            body.append(FOOTBALL_BASE)
        if i % 11 == 0:
            body.append(HOCKEY_BASE)
        body += filler(rng.randint(1, 2))
        links = []
        if i < 59:
            links.append((f"c{i + 1:03d}.html", "next innings"))
        links.append((f"f{i:03d}.html", "football page"))
        if i % 3 == 0:
            links.append((f"x{i // 3:03d}.html", "town notes"))
        if i % 12 == 0:
            links.append((f"m{i // 12:03d}.html", "weekend roundup"))
        pages[f"c{i:03d}.html"] = page(f"Cricket bulletin {i}", body, links)

    for i in range(60):
        body = [FOOTBALL_BASE] + rng.sample(FOOTBALL_EXTRAS, rng.randint(0, 2)) + [ALPHA]
        if i % 9 == 0:
            body.append(HOCKEY_BASE)
        body += filler(rng.randint(1, 2))
        links = []
        if i < 59:
            links.append((f"f{i + 1:03d}.html", "next fixture"))
        links.append((f"h{i:03d}.html", "hockey page"))
        pages[f"f{i:03d}.html"] = page(f"Football bulletin {i}", body, links)

    for i in range(60):
        body = [HOCKEY_BASE] + rng.sample(HOCKEY_EXTRAS, rng.randint(0, 2)) + [ALPHA]
        if i % 8 == 0:
            body.append(FOOTBALL_BASE)
        body += filler(rng.randint(1, 2))
        links = []
        if i < 59:
            links.append((f"h{i + 1:03d}.html", "next period"))
        links.append((f"c{i:03d}.html", "cricket page"))
        pages[f"h{i:03d}.html"] = page(f"Hockey bulletin {i}", body, links)

    for j in range(20):
        body = filler(rng.randint(2, 4))
        links = []
        if j < 19:
            links.append((f"x{j + 1:03d}.html", "more notes"))
        links.append((f"c{3 * j:03d}.html", "sports section"))
        pages[f"x{j:03d}.html"] = page(f"Town notes {j}", body, links)

    for k in range(5):
        body = [CRICKET_BASE, FOOTBALL_BASE, HOCKEY_BASE, ALPHA] + filler(1)
        links = [
            (f"c{k:03d}.html", "cricket page"),
            (f"f{k:03d}.html", "football page"),
            (f"h{k:03d}.html", "hockey page"),
        ]
        pages[f"m{k:03d}.html"] = page(f"Weekend roundup {k}", body, links)

    for name in sorted(pages):
        (ROOT / name).write_text(pages[name], encoding="utf-8")
    print(f"wrote {len(pages)} pages under {ROOT}")


if __name__ == "__main__":
    main()
