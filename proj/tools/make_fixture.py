#!/usr/bin/env python3
"""Generates the bundled fixtures.

fixtures/fixture/       small multi-project store, gender table, config,
                        and (with --cli) a labeled annotation session
fixtures/synthetic400/  400 labeled comments whose classes are separable

The store is written first; the session sample is then drawn by the CLI
itself (`imentor sample`) so it is the sample the toolkit would draw, and
two scripted annotators label it here.
"""

import argparse
import json
import random
import subprocess
from datetime import datetime, timedelta, timezone
from pathlib import Path

EPOCH = datetime(2018, 1, 8, 9, 0, 0, tzinfo=timezone.utc)


def ts(dt):
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


# login, display name, location, account created (days after EPOCH, may be negative)
PEOPLE = [
    ("bstone", "Bob Stone", "Seattle, USA", -900),
    ("amartin", "Alice Martin", "Lyon, France", -400),
    ("cgarcia", "Carlos Garcia", "Madrid, Spain", -1500),
    ("eadams", "Eve Adams", None, 20),
    ("fmueller", "Frank Mueller", "Berlin, Germany", -200),
    ("gwong", "Grace Wong", "Singapore", 150),
    ("hpatel", "Hari Patel", "Pune, India", 300),
    ("ijones", "Ivan Jones", None, -2000),
    ("jsmith", "John Smith", "Austin, USA", -50),
    ("kkim", "Dana Kim", "Seoul, South Korea", 10),  # confidence 0.89: excluded
    ("lchen", "Li Chen", None, -300),  # ambiguous name
    ("mrossi", "Andrea Rossi", "Milan, Italy", -700),  # location decides
    ("nobody42", None, None, 60),  # no display name
    ("oolsen", "Olaf Olsen", "Oslo, Norway", -1200),
    ("pnovak", "Petr Novak", "Brno, Czechia", 250),
    ("qzhang", "Wei Zhang", None, 20),  # below cutoff
    ("rbrown", "Robert Brown", "Leeds, UK", -300),
    ("tmoore", "Tom Moore", None, -100),
    ("ughost", None, None, None),  # deleted account
]

# name, location, scale (-1 man .. +1 woman)
GENDER_TABLE = [
    ("Bob Stone", "", -0.98),
    ("Alice Martin", "", 0.97),
    ("Carlos Garcia", "", -0.99),
    ("Eve Adams", "", 0.95),
    ("Frank Mueller", "", -0.96),
    ("Grace Wong", "", 0.93),
    ("Hari Patel", "", -0.94),
    ("Ivan Jones", "", -0.97),
    ("John Smith", "", -0.99),
    ("Dana Kim", "", 0.89),
    ("Li Chen", "", 0.12),
    ("Andrea Rossi", "Milan, Italy", -0.95),
    ("Andrea Rossi", "", 0.61),
    ("Olaf Olsen", "", -0.98),
    ("Petr Novak", "", -0.97),
    ("Wei Zhang", "", -0.55),
    ("Robert Brown", "", -0.99),
    ("Tom Moore", "", -0.97),
]

# project -> [(login, first activity in days after EPOCH)]
PROJECTS = {
    "acme/alpha": [
        ("bstone", 0), ("amartin", 30), ("cgarcia", 60), ("eadams", 213), ("fmueller", 400),
        ("gwong", 600), ("hpatel", 700), ("kkim", 750), ("ughost", 90), ("mrossi", 240),
    ],
    "acme/beta": [
        ("amartin", 100), ("jsmith", 0), ("gwong", 283), ("eadams", 500), ("lchen", 550),
        ("nobody42", 600), ("ijones", 20), ("tmoore", 900),
    ],
    "acme/gamma": [
        ("oolsen", 0), ("pnovak", 300), ("rbrown", 120), ("tmoore", 450), ("ijones", 200),
    ],
    "acme/delta": [
        ("lchen", 0), ("qzhang", 50), ("nobody42", 400),
    ],
}

TOPICS = [
    ("cache", "eviction", "the cache grows without bound"),
    ("parser", "tokenizer", "the parser backtracks on every quote"),
    ("scheduler", "queue", "tasks starve under load"),
    ("config", "defaults", "users override the wrong key"),
    ("logging", "formatter", "log lines interleave across threads"),
    ("retry", "backoff", "clients hammer the server after an outage"),
    ("index", "segment", "merges block readers"),
    ("auth", "token", "expired tokens are accepted"),
    ("metrics", "counter", "counters overflow after a week"),
    ("serializer", "schema", "old records fail to load"),
]

MENTORING = [
    "Consider moving the {a} check into the {b} helper, because {c} and keeping it in one place makes the invariant obvious.",
    "Please use the existing {b} utility here instead of a new loop, since {c}; the utility already handles the empty case.",
    "I would rename this to describe the {a} state, otherwise readers assume it is the {b}; we had exactly this confusion when {c}.",
    "You can fix the failing test by resetting the {b} in setUp, because the previous test leaves it populated and {c}.",
    "Suggest wrapping the {a} call in try-with-resources so the {b} is closed even on error; otherwise {c}.",
    "Try running the {a} benchmark before and after, because {c} and numbers will help reviewers trust the {b} change.",
    "Prefer an immutable {b} here: mutation from two threads is why {c}, and immutability removes that class of bug.",
    "Instead of catching Exception, catch the specific {a} error, so that unexpected failures still surface; {c} is a good example.",
]

PLAIN = [
    "LGTM, thanks!",
    "Thanks for the {a} patch.",
    "Merged to main.",
    "+1",
    "Can you rebase on top of main?",
    "Looks good to me.",
    "Nice work on the {b}.",
    "Ping, any update on this {a} change?",
    "Retest this please.",
    "CI is green now.",
    "Closing as duplicate.",
    "Approved.",
]

DESCRIPTIONS = [
    "Fix {a} {b}",
    "## Summary\nThis change reworks the {a} {b} because {c}.\n\n<!-- template: describe testing -->\n- adds tests\n- updates docs",
    "Improve {a} handling.\n\nPreviously {c}. With this patch the {b} is bounded and we log a warning when the limit is hit, "
    "which makes the behaviour visible to operators during incidents and in nightly runs.",
    "**Refactor** the {a} [module](https://example.org/{a}) so the {b} can be reused",
    "Bump {a} version",
    "Add {b} option to {a}\n\n```\n{a}.{b} = true\n```\nDocumented in the user guide together with the migration notes for existing deployments.",
]


def fill(rng, template):
    a, b, c = rng.choice(TOPICS)
    return template.format(a=a, b=b, c=c)


def build_store(out: Path, rng: random.Random):
    store = out / "store"
    store.mkdir(parents=True, exist_ok=True)
    people = {p[0]: p for p in PEOPLE}
    comment_id = 9000
    summary = {}
    for project, members in PROJECTS.items():
        stem = project.replace("/", "__")
        prs, comments, active = [], [], set()
        pr_id = 0
        start = {login: EPOCH + timedelta(days=day) for login, day in members}
        logins = [m[0] for m in members]

        def add_pr(author, when, reopened=False):
            nonlocal pr_id
            pr_id += 1
            prs.append({
                "pr_id": pr_id, "project": project, "author": author,
                "description": fill(rng, rng.choice(DESCRIPTIONS)),
                "created_at": ts(when), "state": rng.choice(["merged", "merged", "closed", "open"]),
                "events": ["reopened"] if reopened else [],
            })
            active.add(author)
            return pr_id, when

        def add_comment(pr, author, when, mentoring):
            nonlocal comment_id
            comment_id += 1
            body = fill(rng, rng.choice(MENTORING if mentoring else PLAIN))
            comments.append({"comment_id": comment_id, "pr": pr, "author": author, "body": body, "created_at": ts(when)})
            active.add(author)

        # Each member's first activity is an introductory PR on their start date.
        intro = {}
        for login in sorted(logins, key=lambda l: start[l]):
            intro[login] = add_pr(login, start[login])
        # Regular PRs with review threads.
        n_prs = {"acme/alpha": 16, "acme/beta": 12, "acme/gamma": 8, "acme/delta": 3}[project]
        for _ in range(n_prs):
            author = rng.choice(logins)
            when = start[author] + timedelta(days=rng.randint(5, 500), hours=rng.randint(0, 23))
            reopened = rng.random() < 0.2
            pr, created = add_pr(author, when, reopened)
            others = [l for l in logins if l != author and start[l] <= created]
            threads = rng.randint(0, 6) + (3 if reopened else 0)
            for k in range(threads):
                if not others:
                    break
                who = rng.choice(others)
                if rng.random() < 0.1:
                    who = author  # self-comment, dropped at analysis time
                mentoring = rng.random() < (0.6 if reopened else 0.35)
                add_comment(pr, who, created + timedelta(hours=2 + 7 * k, minutes=rng.randint(0, 59)), mentoring)
        # Reviews on introductory PRs so that exact experience gaps show up.
        for login, (pr, created) in intro.items():
            reviewers = [l for l in logins if l != login and start[l] <= created]
            for who in rng.sample(reviewers, min(len(reviewers), 2)):
                add_comment(pr, who, created + timedelta(hours=3), rng.random() < 0.5)

        with open(store / f"{stem}.prs.ndjson", "w") as f:
            for r in prs:
                f.write(json.dumps(r) + "\n")
        with open(store / f"{stem}.comments.ndjson", "w") as f:
            for r in comments:
                f.write(json.dumps(r) + "\n")
        with open(store / f"{stem}.contributors.ndjson", "w") as f:
            for login in sorted(active):
                _, name, location, created = people[login]
                rec = {"login": login, "display_name": name, "location": location}
                if created is None:
                    rec["deleted"] = True
                    rec["account_created_at"] = None
                else:
                    rec["account_created_at"] = ts(EPOCH + timedelta(days=created))
                f.write(json.dumps(rec) + "\n")
        summary[project] = (len(prs), len(comments))
    return summary


def write_genders(out: Path):
    with open(out / "genders.tsv", "w") as f:
        f.write("# name\tlocation\tscale (-1 man .. +1 woman)\n")
        for name, location, scale in GENDER_TABLE:
            f.write(f"{name}\t{location}\t{scale}\n")


def write_config(out: Path):
    config = {
        "store": "store",
        "labels": "labels.session.ndjson",
        "classifier": {
            "family": "random-forest",
            "evaluate": ["random-forest", "support-vector", "naive-bayes-bernoulli", "decision-tree", "k-neighbors"],
            "folds": 10,
        },
        "genders": {"client": "fixture", "fixture": "genders.tsv", "cutoff": 0.9},
        "seeds": {"sample": 7, "train": 11},
        "alpha": 0.05,
        "bonferroni_tests": 3,
        "threshold_days": 183,
        "formats": ["plain", "csv", "json-lines"],
    }
    with open(out / "config.json", "w") as f:
        f.write(json.dumps(config, indent=2) + "\n")


def is_mentoring(body):
    return any(w in body for w in ("because", "since", "otherwise", "so that", "so the", "why"))


def label_entry(comment_id, annotator, label):
    return {
        "type": "label", "comment_id": comment_id, "annotator": annotator, "label": label,
        "rule_tags": ["suggestion"] if label else [], "has_explanation": label,
    }


def label_session(session: Path, rng: random.Random):
    lines = session.read_text().splitlines()
    items = [json.loads(l) for l in lines if json.loads(l)["type"] == "sample"]
    entries = []
    overlap = set(i["comment_id"] for i in rng.sample(items, max(2, len(items) // 5)))
    disagreements = []
    for k, item in enumerate(items):
        truth = is_mentoring(item["body"])
        first = "rater-a" if k % 2 == 0 else "rater-b"
        entries.append(label_entry(item["comment_id"], first, truth))
        if item["comment_id"] in overlap:
            other = "rater-b" if first == "rater-a" else "rater-a"
            flip = rng.random() < 0.2
            entries.append(label_entry(item["comment_id"], other, truth != flip))
            if flip:
                disagreements.append((item["comment_id"], truth))
    for cid, truth in disagreements:
        entries.append({"type": "resolution", "comment_id": cid, "resolver": "rater-a+rater-b", "label": truth,
                        "rule_tags": ["suggestion"] if truth else [], "has_explanation": truth})
    with open(session, "a") as f:
        for e in entries:
            f.write(json.dumps(e) + "\n")
    return len(items), len(overlap), len(disagreements)


def build_synthetic400(out: Path, rng: random.Random):
    """Positives explain a change; negatives are short acknowledgements.
    The two classes share no content words, so they are separable."""
    out.mkdir(parents=True, exist_ok=True)
    pos_verbs = ["consider", "prefer", "suggest", "try", "recommend", "use", "move", "rename", "extract", "avoid"]
    pos_reasons = ["because", "since", "otherwise", "so that"]
    pos_objects = ["helper", "iterator", "builder", "constant", "interface", "lock", "buffer", "fixture", "assertion",
                   "factory"]
    pos_effects = ["readers understand the invariant", "the race disappears", "allocation drops", "tests stay isolated",
                   "errors surface early", "the API stays stable", "callers cannot misuse it", "reviews get easier"]
    neg_words = ["lgtm", "thanks", "merged", "approved", "ping", "rebase", "green", "done", "ok", "nice", "ship",
                 "closing", "duplicate", "retest", "bump", "+1"]
    lines = [json.dumps({"type": "session", "seed": 0, "population": 400, "size": 400})]
    labels = []
    for i in range(400):
        cid = 50000 + i
        positive = i % 2 == 0
        if positive:
            body = (f"{rng.choice(pos_verbs).capitalize()} the {rng.choice(pos_objects)} here, "
                    f"{rng.choice(pos_reasons)} {rng.choice(pos_effects)}; "
                    f"{rng.choice(pos_verbs)} a {rng.choice(pos_objects)} {rng.choice(pos_reasons)} "
                    f"{rng.choice(pos_effects)}.")
        else:
            body = " ".join(rng.choice(neg_words) for _ in range(rng.randint(1, 4)))
        lines.append(json.dumps({"type": "sample", "index": i, "comment_id": cid, "project": "synthetic/corpus",
                                 "pr": 1 + i // 4, "body": body}))
        labels.append(label_entry(cid, "rater-a", positive))
    with open(out / "labels.session.ndjson", "w") as f:
        for l in lines:
            f.write(l + "\n")
        for e in labels:
            f.write(json.dumps(e) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--root", default=str(Path(__file__).resolve().parent.parent / "fixtures"))
    ap.add_argument("--cli", help="path to the imentor binary; draws and labels the fixture session")
    ap.add_argument("--sample-size", type=int, default=80)
    args = ap.parse_args()
    root = Path(args.root)
    fixture = root / "fixture"
    fixture.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20230117)
    summary = build_store(fixture, rng)
    write_genders(fixture)
    write_config(fixture)
    for project, (prs, comments) in summary.items():
        print(f"{project}: {prs} PRs, {comments} comments")
    if args.cli:
        session = fixture / "labels.session.ndjson"
        subprocess.run([args.cli, "sample", "--store", str(fixture / "store"), "--size", str(args.sample_size),
                        "--seed", "7", "--out", str(session)], check=True)
        n, overlap, conflicts = label_session(session, random.Random(7))
        print(f"session: {n} sampled, {overlap} double-labeled, {conflicts} resolved disagreements")
    build_synthetic400(root / "synthetic400", random.Random(400))


if __name__ == "__main__":
    main()
