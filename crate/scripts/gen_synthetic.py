#!/usr/bin/env python3
"""Writes the synthetic evaluation corpus, its ground truth and entity source.

Every event is reported several times with conflicting attributes: early
rumors carry a wrong amount, retrospectives quote an inflated figure on the
publication date, and the accurate reports are long business articles with
an explicit date. Output is fully determined by SEED.
"""

import argparse
import datetime as dt
import json
import random
import re
from decimal import Decimal
from pathlib import Path

SEED = 20070301

TARGETS = [
    "Halvorsen Systems",
    "Quillon Networks",
    "Marrowby Pharmaceuticals",
    "Ostrander Energy",
    "Vantrel Media",
    "Cobaltine Foods",
]

OBJECTS = [
    "Pennick Software", "Drayfield Labs", "Solent Robotics", "Kestrel Biotech",
    "Arbury Gas", "Lumen Pictures", "Tarrow Dairy", "Brisco Analytics",
    "Felgate Mining", "Yarrow Studios", "Nettle Brands", "Corvane Devices",
    "Ashby Wind", "Greyhill Press", "Pelham Genomics", "Wexcombe Freight",
    "Ruddock Chemicals", "Tamsin Optics", "Elstow Bakeries", "Mirefield Solar",
]

MONTHS = ["January", "February", "March", "April", "May", "June", "July",
          "August", "September", "October", "November", "December"]

FILLER = [
    "Shares of {s} rose in afternoon trading.",
    "Analysts had expected the move for several months.",
    "The companies did not disclose how many employees would be affected.",
    "{o} was founded by a group of former university researchers.",
    "Executives at {s} said the combined business would keep its current headquarters.",
    "Regulators are expected to review the arrangement.",
    "Several rival bidders had approached {o} earlier.",
    "The deal is the largest in the history of {s}.",
    "Customers of {o} were told that existing contracts would be honored.",
    "Investors welcomed the announcement.",
    "The board of {o} approved the terms unanimously.",
    "Both companies described the talks as friendly.",
    "{s} has been looking for ways to expand beyond its core market.",
    "People briefed on the negotiations described them as lengthy.",
]


def entity_id(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")


def money(amount: Decimal) -> str:
    if amount >= Decimal("1000000000"):
        text = f"{(amount / Decimal('1000000000')).normalize():f}"
        return f"${text} billion"
    text = f"{(amount / Decimal('1000000')).normalize():f}"
    return f"${text} million"


def round_amount(amount: Decimal) -> Decimal:
    if amount >= Decimal("1000000000"):
        unit = Decimal("100000000")
    else:
        unit = Decimal("10000000")
    return (amount / unit).to_integral_value() * unit


def wrong_amount(rng: random.Random, truth: Decimal) -> Decimal:
    factor = Decimal(str(rng.choice([0.55, 0.6, 0.65, 0.7, 1.3, 1.4, 1.5])))
    return round_amount(truth * factor)


class Writer:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.docs = []

    def add(self, published: dt.date, title: str, event_sentences, fillers: int,
            descriptors, s: str, o: str):
        sentences = [f.format(s=s, o=o) for f in self.rng.sample(FILLER, fillers)]
        at = self.rng.randint(0, min(2, len(sentences)))
        body = " ".join(sentences[:at] + list(event_sentences) + sentences[at:])
        self.docs.append({
            "id": "",
            "published": published.isoformat(),
            "title": title,
            "body": body,
            "descriptors": descriptors,
        })


def build(rng: random.Random):
    writer = Writer(rng)
    truths = []
    objects = list(OBJECTS)
    rng.shuffle(objects)
    plans = []
    for i, s in enumerate(TARGETS):
        for j in range(2 if i % 2 else 3):
            plans.append((s, objects.pop()))

    for n, (s, o) in enumerate(plans):
        invest = n % 4 == 3
        year = rng.randint(2003, 2009)
        month = rng.randint(1, 12)
        day = rng.randint(1, 28)
        when = dt.date(year, month, day)
        if invest:
            truth = Decimal(rng.randint(5, 90)) * Decimal("10000000")
        else:
            truth = Decimal(rng.randint(3, 120)) * Decimal("100000000")
        truths.append({
            "company": entity_id(s), "subject": entity_id(s), "predicate": "invest" if invest else "acquire",
            "object": entity_id(o), "amount": str(truth), "currency": "USD",
            "date": f"{year:04d}-{month:02d}",
        })
        verb, noun = ("invested", "investment in") if invest else ("acquired", "acquisition of")
        month_name = MONTHS[month - 1]

        rumors = 0 if n % 5 == 1 else rng.randint(1, 2)
        rumor_value = wrong_amount(rng, truth)
        for r in range(rumors):
            published = when - dt.timedelta(days=rng.randint(40, 150) + 30 * r)
            if invest:
                line = f"{s} is said to be preparing to invest {money(rumor_value)} in {o}."
            else:
                line = f"{s} is in talks to acquire {o} for about {money(rumor_value)}."
            writer.add(published, f"{s} weighs a deal", [line], rng.randint(0, 2),
                       rng.choice([["Technology"], ["Markets"], []]), s, o)

        for r in range(rng.randint(1, 2)):
            published = when + dt.timedelta(days=rng.randint(0, 20))
            if r == 0:
                if invest:
                    line = f"{s} {verb} {money(truth)} in {o} in {month_name} {year}."
                else:
                    line = f"{s} {verb} {o} for {money(truth)} in {month_name} {year}."
            else:
                line = f"{s} completed its {money(truth)} {noun} {o} on {month_name} {day}, {year}."
            if rng.random() < 0.6:
                premium = round_amount(truth * Decimal(str(rng.choice([0.1, 0.15, 0.2]))))
                line = line[:-1] + f", about {money(premium)} more than analysts expected."
            writer.add(published, f"{s} agrees to deal for {o}", [line],
                       rng.randint(6, 11), ["Business", "Mergers, Acquisitions and Divestitures"], s, o)

        if n % 3 != 2:
            published = when + dt.timedelta(days=rng.randint(400, 1100))
            inflated = round_amount(truth * Decimal(str(rng.choice([1.6, 1.8, 2.0]))))
            if invest:
                line = f"{s} invested {money(inflated)} in {o}, according to people familiar with the matter."
            else:
                line = f"{s} bought {o} for {money(inflated)}, according to people familiar with the matter."
            writer.add(published, f"Looking back at {s}", [line], rng.randint(1, 3),
                       rng.choice([["Opinion"], ["Technology"]]), s, o)

    # rumored deals that never closed
    for s in rng.sample(TARGETS, 3):
        o = objects.pop()
        year = rng.randint(2003, 2009)
        published = dt.date(year, rng.randint(1, 12), rng.randint(1, 28))
        value = Decimal(rng.randint(2, 40)) * Decimal("100000000")
        line = f"{s} is in talks to acquire {o} for about {money(value)}."
        writer.add(published, f"{s} weighs a deal", [line], rng.randint(0, 2), ["Markets"], s, o)

    # a deal between companies nobody tracks
    o1, o2 = objects.pop(), objects.pop()
    writer.add(dt.date(2006, 5, 4), f"{o1} expands", [f"{o1} acquired {o2} for $150 million in May 2006."],
               3, ["Business"], o1, o2)

    writer.docs.sort(key=lambda d: (d["published"], d["title"], d["body"]))
    for i, doc in enumerate(writer.docs):
        doc["id"] = f"syn-{i:03d}"
    entities = []
    for name in TARGETS + OBJECTS:
        slug = name.replace(" ", "_")
        uris = [f"dbpedia:{slug}"]
        if rng.random() < 0.7:
            uris.append(f"freebase:m.{rng.randrange(16**6):06x}")
        if rng.random() < 0.5:
            uris.append(f"crunchbase:organization/{slug.lower()}")
        entities.append({"name": name, "uris": uris, "has_description": rng.random() < 0.8,
                         "prominence": round(rng.uniform(1, 50), 2)})
    return writer.docs, truths, entities


def write_jsonl(path: Path, rows):
    with path.open("w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, sort_keys=True) + "\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "synthetic")
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    docs, truths, entities = build(random.Random(SEED))
    write_jsonl(args.out / "corpus.jsonl", docs)
    write_jsonl(args.out / "truth.jsonl", truths)
    write_jsonl(args.out / "entities.jsonl", entities)
    print(f"{len(docs)} documents, {len(truths)} truth events")


if __name__ == "__main__":
    main()
