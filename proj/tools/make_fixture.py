#!/usr/bin/env python3
"""Regenerates the bundled fixture corpus under data/fixture/.

Output is deterministic (fixed seed). The hand-labelled partition in
partition.tsv is written from the design tables below, not from running
the pipeline.
"""

import hashlib
import json
import random
import sys
from pathlib import Path
from xml.sax.saxutils import escape

OUT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data" / "fixture"
rng = random.Random(20240615)

# --------------------------------------------------------------------------
# Dictionary

# concept -> (article title, euphemistic headwords with glosses)
TABOO = {
    "hell": ("Hell", [("heck", "Euphemism for hell, a place of torment"),
                      ("h-e-double-hockey-sticks", "Hell, the place of torment"),
                      ("the other place", "Hell, as opposed to heaven"),
                      ("blazes", "Hell; expressing torment")]),
    "death": ("Death", [("pass away", "To die; to meet death"),
                        ("kick the bucket", "To die; death"),
                        ("eternal rest", "Death, regarded as rest"),
                        ("big sleep", "Death, the final sleep")]),
    "sexual intercourse": ("Sexual intercourse", [
        ("sleep with", "To engage in sexual intercourse with someone"),
        ("make love", "To engage in sexual intercourse"),
        ("hanky-panky", "Sexual intercourse, especially illicit"),
        ("roll in the hay", "An act of sexual intercourse")]),
    "menstruation": ("Menstruation", [("time of the month", "Menstruation; the menstrual period"),
                                      ("aunt flo", "Menstruation, personified"),
                                      ("on the rag", "Undergoing menstruation")]),
    "urination": ("Urination", [("number one", "Urination, in childish speech"),
                                ("tinkle", "Urination; to urinate"),
                                ("spend a penny", "To go for urination")]),
    "defecation": ("Defecation", [("number two", "Defecation, in childish speech"),
                                  ("do one's business", "Defecation, or urination"),
                                  ("movement", "An instance of defecation")]),
    "prostitution": ("Prostitution", [("working girl", "A woman engaged in prostitution"),
                                      ("oldest profession", "Prostitution"),
                                      ("lady of the night", "A woman in prostitution")]),
    "masturbation": ("Masturbation", [("self-love", "Masturbation"),
                                      ("self-abuse", "Masturbation, disapprovingly"),
                                      ("playing with oneself", "Masturbation")]),
    "drunkenness": ("Drunkenness", [("tired and emotional", "Drunkenness; intoxicated"),
                                    ("under the influence", "In a state of drunkenness; intoxicated"),
                                    ("tipsy", "Mild drunkenness")]),
    "pregnancy": ("Pregnancy", [("in the family way", "In pregnancy; expecting a child"),
                                ("bun in the oven", "A pregnancy; expecting a child"),
                                ("expecting", "In pregnancy")]),
    "buttocks": ("Buttocks", [("behind", "The buttocks"),
                              ("derriere", "The buttocks; rear"),
                              ("bottom", "The buttocks, rear of a person")]),
}

NEUTRAL_TOPICS = {
    "horse": "a large hoofed animal ridden by people",
    "bread": "a baked food made from flour and water",
    "river": "a large natural stream of flowing water",
    "kitchen knife": "a knife used for cutting food in a kitchen",
    "thunderstorm": "a storm with lightning and thunder",
    "bicycle": "a vehicle with two wheels driven by pedals",
    "garden": "a plot of land used for growing flowers or vegetables",
    "mountain": "a large natural elevation of the earth",
    "violin": "a string instrument played with a bow",
    "library": "a building where books are kept for reading",
    "teacher": "a worker who teaches pupils in a school",
    "carpet": "a thick woven floor covering",
    "lighthouse": "a tower with a bright lamp that guides ships",
    "cheese": "a food made from pressed milk curds",
    "apple": "a round fruit of a tree with red or green skin",
    "bridge": "a structure built to span a river or road",
    "mercury": "a silvery metal that is liquid at room temperature",
    "teapot": "a vessel with a spout for brewing tea",
    "kettle": "a metal vessel for boiling water",
    "rivers": "streams of water; more than one river",
    "steed": "a horse ridden into battle",
    "cheese rind": "the hard outer layer of cheese",
    "bank": "the edge of a river or the land beside it",
    "orchard": "a plot of land with fruit trees",
    "window": "an opening in a wall fitted with glass",
}

FILLER = ("small", "green", "wooden", "old", "quiet", "bright", "heavy", "common", "farm", "market",
          "stone", "summer", "winter", "village", "city", "table", "chair", "road", "ship", "garden",
          "paper", "cloth", "metal", "glass", "grain", "salt", "sugar", "copper", "iron", "sand",
          "cart", "barn", "field", "meadow", "forest", "valley", "island", "harbour", "tower", "window",
          "basket", "bottle", "candle", "hammer", "ladder", "rope", "needle", "thread", "brush", "bucket")
NOUNS = ("tool", "vessel", "building", "plant", "dish", "game", "dance", "song", "boat", "coin",
         "garment", "device", "room", "wall", "gate", "lamp", "shelf", "box", "bag", "drum")


def sense(word, glosses, tags=()):
    s = {"glosses": list(glosses)}
    if tags:
        s["tags"] = list(tags)
    return s


def dictionary_lines():
    lines = []
    for concept, (_, entries) in TABOO.items():
        for head, gloss in entries:
            lines.append({"word": head, "lang_code": "en", "lang": "English", "pos": "noun",
                          "senses": [sense(head, [gloss], ["euphemistic", "informal"])]})
    for word, gloss in NEUTRAL_TOPICS.items():
        lines.append({"word": word, "lang_code": "en", "lang": "English", "pos": "noun",
                      "senses": [sense(word, [gloss[0].upper() + gloss[1:] + "."])]})
    # Reference glosses so every topic title occurs in some definition.
    for i, word in enumerate(NEUTRAL_TOPICS):
        for j in range(2):
            a = FILLER[(3 * i + j) % len(FILLER)]
            lines.append({"word": f"{a}{word.replace(' ', '')}{j}", "lang_code": "en", "lang": "English",
                          "senses": [sense(word, [f"A {a} {NOUNS[(i + j) % len(NOUNS)]} kept beside a {word}."])]})
    # Bulk neutral senses from a small grammar.
    seen = set()
    while len(lines) < 470:
        a, b = rng.sample(FILLER, 2)
        n = rng.choice(NOUNS)
        head = f"{a}{n}"
        gloss = f"A {a} {n} used near the {b}."
        if (head, gloss) in seen:
            continue
        seen.add((head, gloss))
        tags = ["countable"] if rng.random() < 0.3 else []
        lines.append({"word": head, "lang_code": "en", "lang": "English", "pos": "noun",
                      "senses": [sense(head, [gloss], tags)]})
    # Filtered: redirect prefixes, other languages, duplicates, empty glosses.
    lines.append({"word": "hells", "lang_code": "en", "senses": [sense("hells", ["plural of hell"]),
                                                                  sense("hells", ["Alternative form of hell"])]})
    lines.append({"word": "ded", "lang_code": "en", "senses": [sense("ded", ["Synonym of death"], ["euphemistic"])]})
    lines.append({"word": "morte", "lang_code": "fr", "lang": "French",
                  "senses": [sense("morte", ["death"], ["euphemistic"])]})
    lines.append({"word": "horse", "lang_code": "en", "senses": [sense("horse", ["A large hoofed animal ridden by people."])]})
    lines.append({"word": "blank", "lang_code": "en", "senses": [sense("blank", [""]), sense("blank", ["   "])]})
    lines.append({"word": "wbw", "lang": "English", "senses": [sense("wbw", ["Initialism of wait but why"])]})
    # Multi-gloss senses.
    for i in range(12):
        a, b, c = rng.sample(FILLER, 3)
        lines.append({"word": f"multi{i}", "lang_code": "en",
                      "senses": [{"glosses": [f"A {a} {rng.choice(NOUNS)}.", f"A {b} {c} {rng.choice(NOUNS)}."]}]})
    rng.shuffle(lines)
    text = [json.dumps(l, ensure_ascii=False, sort_keys=True) for l in lines]
    # Malformed lines, logged and skipped.
    text.insert(17, '{"word": "broken", "senses": [')
    text.insert(211, '{"senses": []}')
    text.insert(300, "")
    return text


# --------------------------------------------------------------------------
# Pages

# (page_id, title, kind, extra) ; kind: article|redirect|disambig|list|unmatched
PAGES = []
next_id = [1000]


def page(title, kind="article", target=None, ns=0, text_marker=False):
    pid = next_id[0]
    next_id[0] += 7
    PAGES.append({"id": pid, "title": title, "kind": kind, "target": target, "ns": ns, "marker": text_marker})
    return pid


taboo_ids, comparison_ids = {}, {}
for concept, (title, _) in TABOO.items():
    taboo_ids[title] = page(title)
bobby = page("Being Bobby Brown")  # reached only through the redirect below
taboo_ids["Being Bobby Brown"] = bobby
page("Hell to the no", "redirect", "Being Bobby Brown")
page("Kick the bucket", "redirect", "Death")  # matches nothing after normalization? ("kick bucket")

for word in ("horse", "bread", "river", "kitchen knife", "thunderstorm", "bicycle", "garden", "mountain",
             "violin", "library", "teacher", "carpet", "lighthouse", "cheese", "apple", "bridge", "orchard"):
    title = word[0].upper() + word[1:]
    comparison_ids[title] = page(title)
page("Steed", "redirect", "Horse")                      # resolves to an already matched article
page("Rivers", "redirect", "List of rivers")            # resolves to a list page: dropped
page("List of rivers", "list")
page("Mercury", "disambig", text_marker=True)           # disambiguation by template: dropped
page("Bank", "redirect", "Bank (disambiguation)")       # disambiguation by suffix: dropped
page("Bank (disambiguation)", "disambig")
page("Cheese rind", "redirect", "Cheese#Rind")          # section redirect: dropped
page("Teapot", "redirect", "Kettle")                    # redirect cycle: dropped
page("Kettle", "redirect", "Teapot")
page("Window", "redirect", "Missing page")              # dangling redirect: dropped
page("Quantum chromodynamics")                          # matches no n-gram
page("Zanzibar")

USERS = ["Quillfeather", "Marlow Tansy", "Brindlewick", "Osric Vantablack", "Pemberly Hollis", "Zephyrine Q",
         "Thorncastle", "Ivo Redwater", "Lark Sumner", "Nettlebeck", "Ondine Farrow", "Crispin Vale",
         "Wrenna Okafor", "Galloway Peck", "Hesper Lunde", "Tobiah Marsh", "Isolde Grey", "Barnaby Quist",
         "Sorrel Ainsley", "Mirelle Duchamp"]
IPS = [f"192.0.2.{i}" for i in range(11, 31)] + [f"2001:db8::{i:x}" for i in range(1, 6)] + \
      [f"198.51.100.{i}" for i in range(40, 50)]
BOTS = ["CleanupBot", "ArchiveBot", "Linkfixer bot"]

user_pages = {}
for u in USERS[:12]:
    user_pages[u] = page("User:" + u, ns=2)
page("User:Quillfeather/sandbox", ns=2)
page("Talk:Horse", ns=1)


def ts(year, month, day, h, m, s):
    return f"{year:04d}-{month:02d}-{day:02d}T{h:02d}:{m:02d}:{s:02d}Z"


revision_counter = [500000]
all_revisions = []  # (rev_id, page_id)
user_page_revs = {}


def history(pid, taboo, n):
    """Synthetic revision list: (rev_id, timestamp, contributor, text)."""
    revs = []
    texts = []
    year = rng.randint(2004, 2010)
    month = rng.randint(1, 12)
    body = f"Article {pid} initial text."
    for i in range(n):
        revision_counter[0] += rng.randint(1, 40)
        rid = revision_counter[0]
        month += rng.randint(0, 5)
        while month > 12:
            month -= 12
            year += 1
        year = min(year, 2022)
        stamp = ts(year, month, rng.randint(1, 28), rng.randint(0, 23), rng.randint(0, 59), rng.randint(0, 59))
        r = rng.random()
        anon_share = 0.45 if taboo else 0.2
        if r < 0.08:
            contrib = ("bot", rng.choice(BOTS))
        elif r < 0.08 + anon_share:
            contrib = ("ip", rng.choice(IPS))
        elif r < 0.08 + anon_share + 0.02:
            contrib = ("deleted", None)
        else:
            pool = USERS[:14] if taboo else USERS[6:]
            contrib = ("user", rng.choice(pool))
        revert_p = 0.22 if taboo else 0.08
        if texts and rng.random() < revert_p:
            back = rng.randint(1, min(len(texts), 11))
            text = texts[-back]
        else:
            body += f" Sentence {i} by {rid}."
            text = body
        texts.append(text)
        revs.append((rid, stamp, contrib, text))
    revs.sort(key=lambda r: (r[1], r[0]))
    return revs


def contributor_xml(c):
    kind, name = c
    if kind == "deleted":
        return '      <contributor deleted="deleted" />'
    if kind == "ip":
        return f"      <contributor>\n        <ip>{escape(name)}</ip>\n      </contributor>"
    return f"      <contributor>\n        <username>{escape(name)}</username>\n        <id>{int(hashlib.md5(name.encode()).hexdigest()[:5], 16)}</id>\n      </contributor>"


def base36_sha1(text):
    n = int(hashlib.sha1(text.encode()).hexdigest(), 16)
    digits = "0123456789abcdefghijklmnopqrstuvwxyz"
    out = ""
    while n:
        n, r = divmod(n, 36)
        out = digits[r] + out
    return out.rjust(31, "0")


def dump_xml():
    out = ['<mediawiki xmlns="http://www.mediawiki.org/xml/export-0.10/" version="0.10" xml:lang="en">',
           "  <siteinfo>\n    <sitename>Fixturepedia</sitename>\n  </siteinfo>"]
    no_sha1_pages = {taboo_ids["Death"], comparison_ids["Bread"]}
    for p in PAGES:
        pid, title, kind = p["id"], p["title"], p["kind"]
        out.append("  <page>")
        out.append(f"    <title>{escape(title)}</title>")
        out.append(f"    <ns>{p['ns']}</ns>")
        out.append(f"    <id>{pid}</id>")
        if kind == "redirect":
            out.append(f'    <redirect title="{escape(p["target"])}" />')
        if p["ns"] == 0 and kind == "article":
            is_taboo = pid in taboo_ids.values()
            revs = history(pid, is_taboo, rng.randint(18, 45) if is_taboo else rng.randint(12, 35))
        else:
            revision_counter[0] += 3
            text = f"#REDIRECT [[{p['target']}]]" if kind == "redirect" else f"Page {title}."
            if kind == "disambig" and p["marker"]:
                text = f"'''{title}''' may refer to:\n* a planet\n* an element\n" + "filler " * 30 + "{{disambiguation}}"
            if kind == "list":
                text = "This is a list of rivers."
            stamp = ts(2012, 3, 4, 5, 6, 7)
            if p["ns"] == 2:
                name = title.split(":", 1)[1]
                stamp = ts(rng.randint(2005, 2012), rng.randint(1, 12), 2, 3, 4, 5)
                user_page_revs[name.split("/")[0]] = stamp
            revs = [(revision_counter[0], stamp, ("user", USERS[0]), text)]
        for rid, stamp, contrib, text in revs:
            out.append("    <revision>")
            out.append(f"      <id>{rid}</id>")
            out.append(f"      <timestamp>{stamp}</timestamp>")
            out.append(contributor_xml(contrib))
            out.append(f'      <text bytes="{len(text.encode())}" xml:space="preserve">{escape(text)}</text>')
            if pid not in no_sha1_pages:
                out.append(f"      <sha1>{base36_sha1(text)}</sha1>")
            out.append("    </revision>")
            if p["ns"] == 0:
                all_revisions.append((rid, pid, stamp))
        out.append("  </page>")
    out.append("</mediawiki>")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "dictionary.jsonl").write_text("\n".join(dictionary_lines()) + "\n")
    (OUT / "dump.xml").write_text(dump_xml())

    (OUT / "bots.txt").write_text("# bot accounts\nCleanupBot\tflagged 2009\nArchiveBot\n")
    (OUT / "bots_extra.txt").write_text("Linkfixer_bot\n")

    sampled = {**taboo_ids, **comparison_ids}
    prot = ["# page_id\ttimestamp\taction\tlevel\texpiry"]
    prot.append(f"{taboo_ids['Sexual intercourse']}\t2006-05-01T00:00:00Z\tprotect\t[edit=autoconfirmed] [move=sysop]\t")
    prot.append(f"{taboo_ids['Sexual intercourse']}\t2011-01-01T00:00:00Z\tunprotect\t\t")
    prot.append(f"{taboo_ids['Sexual intercourse']}\t2015-07-01T00:00:00Z\tprotect\t[edit=autoconfirmed]\t")
    prot.append(f"{taboo_ids['Masturbation']}\t2012-01-01T00:00:00Z\tprotect\t[edit=sysop]\t2013-01-01T00:00:00Z")
    prot.append(f"{taboo_ids['Hell']}\t2010-02-01T00:00:00Z\tprotect\t[move=sysop]\t")
    prot.append(f"{comparison_ids['Horse']}\t2009-03-01T00:00:00Z\tprotect\t[edit=autoconfirmed]\t2009-09-01T00:00:00Z")
    prot.append(f"{comparison_ids['Horse']}\t2009-06-01T00:00:00Z\tmodify\t[edit=autoconfirmed]\t2010-03-01T00:00:00Z")
    prot.append(f"{taboo_ids['Death']}\t2018-04-01T00:00:00Z\tprotect\t[edit=autoconfirmed]\t")
    prot.append(f"{taboo_ids['Death']}\t2019-04-01T00:00:00Z\tmodify\t[move=sysop]\t")
    (OUT / "protection.tsv").write_text("\n".join(prot) + "\n")

    pv = ["article\tmonth\tviews"]
    for title, pid in sorted(sampled.items()):
        base = rng.randint(200, 5000) * (3 if pid in taboo_ids.values() else 1)
        for m in range(1, 13):
            key = str(pid) if m % 4 == 0 else title.replace(" ", "_")
            if title == "Orchard" and m > 6:
                continue
            pv.append(f"{key}\t2021-{m:02d}\t{base + rng.randint(-150, 150)}")
    pv.append("Quantum_chromodynamics\t2021-01\t999")
    (OUT / "pageviews.tsv").write_text("\n".join(pv) + "\n")

    retrieved = "2023-01-15T00:00:00Z"
    quality, damaging = [], []
    for rid, pid, stamp in all_revisions:
        year = int(stamp[:4])
        level = min(5, max(0, (year - 2004) // 3 + (1 if pid in taboo_ids.values() else 0)))
        probs = [0.04] * 6
        probs[level] = 0.8
        if rid % 13 == 0:
            continue  # unavailable
        body = {"score": {"prediction": ["Stub", "Start", "C", "B", "GA", "FA"][level],
                          "probability": dict(zip(["Stub", "Start", "C", "B", "GA", "FA"], probs))}}
        quality.append(f"articlequality:{rid}\t{retrieved}\t{json.dumps(body, separators=(',', ':'))}")
        p = round(rng.random() ** (2 if pid in taboo_ids.values() else 4), 4)
        damaging.append(f"damaging:{rid}\t{retrieved}\t{json.dumps({'probability': p}, separators=(',', ':'))}")
    (OUT / "cache_quality.tsv").write_text("\n".join(quality) + "\n")
    (OUT / "cache_damaging.tsv").write_text("\n".join(damaging) + "\n")

    users = []
    for i, u in enumerate(USERS):
        body = {"missing": False, "gender": ["female", "male", "unknown", "unknown"][i % 4],
                "emailable": i % 3 != 0}
        users.append(f"users:{u}\t{retrieved}\t{json.dumps(body, separators=(',', ':'))}")
    (OUT / "cache_users.tsv").write_text("\n".join(users) + "\n")

    cats = []
    for title, pid in sorted(sampled.items()):
        in_scope = (pid in taboo_ids.values() and title not in ("Hell", "Death", "Being Bobby Brown")) or title == "Garden"
        body = {"categories": [f"{title} topics", "Articles with short description"],
                "talk_categories": (["WikiProject Sexology and sexuality articles"] if in_scope else []) +
                                   ["WikiProject Fixtures articles"]}
        cats.append(f"categories:{title}\t{retrieved}\t{json.dumps(body, separators=(',', ':'))}")
    (OUT / "cache_categories.tsv").write_text("\n".join(cats) + "\n")

    part = ["page_id\ttitle\tsample"]
    for title, pid in sorted(taboo_ids.items(), key=lambda kv: kv[1]):
        part.append(f"{pid}\t{title}\ttaboo")
    for title, pid in sorted(comparison_ids.items(), key=lambda kv: kv[1]):
        part.append(f"{pid}\t{title}\tcomparison")
    (OUT / "partition.tsv").write_text("\n".join(part) + "\n")

    names = ["# raw identities present in the fixture inputs"] + USERS + IPS + BOTS
    (OUT / "identities.txt").write_text("\n".join(names) + "\n")


if __name__ == "__main__":
    main()
