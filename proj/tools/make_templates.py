#!/usr/bin/env python3
"""Regenerates templates/ : configs, synthetic data and the task2 wizard answers.

Deterministic (fixed seed). Run from the repository root:
    python3 tools/make_templates.py
"""

import csv
import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "templates"

WORK = [
    ("retirement", "1", "Leaving the workforce at the end of a career"),
    ("layoffs", "2", "Job loss through a layoff or mass reduction"),
    ("syn_job_start", "3", "Synthetic label: starting a new job"),
    ("syn_promotion", "4", "Synthetic label: promotion or raise in rank"),
    ("syn_demotion", "5", "Synthetic label: demotion or loss of rank"),
    ("syn_fired", "6", "Synthetic label: dismissal for cause"),
    ("syn_reduced_hours", "7", "Synthetic label: fewer working hours or pay cut"),
    ("syn_more_hours", "8", "Synthetic label: overtime or extra shifts"),
    ("syn_career_change", "9", "Synthetic label: switching occupation"),
    ("syn_return_to_work", "0", "Synthetic label: coming back after a break"),
    ("syn_leave_of_absence", "q", "Synthetic label: medical or family leave"),
    ("syn_workplace_conflict", "w", "Synthetic label: dispute with a boss or coworker"),
    ("syn_business_closure", "e", "Synthetic label: employer or own business shut down"),
]

HOUSING = [
    ("syn_eviction", "a", "Synthetic label: forced removal by a landlord"),
    ("syn_foreclosure", "s", "Synthetic label: lender repossession of a home"),
    ("syn_moved_in_with_family", "d", "Synthetic label: moving in with relatives"),
    ("syn_homelessness", "f", "Synthetic label: no stable place to live"),
    ("syn_new_residence", "g", "Synthetic label: moving to a new home"),
    ("syn_institutional_stay", "h", "Synthetic label: stay in a shelter, hospital or facility"),
    ("syn_roommate_change", "j", "Synthetic label: someone moved in or out"),
    ("syn_disaster_displacement", "k", "Synthetic label: home lost to fire, flood or storm"),
    ("syn_downsizing", "l", "Synthetic label: moving to a smaller or cheaper home"),
]

# 118 patterns in total, grouped by label.
KEYWORDS = {
    "retirement": ["retir*", "pension*", "retiree", "401k", "annuity", "golden"],
    "layoffs": ["layoff*", "laid", "furlough*", "downsiz*", "redundan*", "severance"],
    "syn_job_start": ["hired", "onboard*", "newjob", "started", "offer", "recruit*"],
    "syn_promotion": ["promot*", "raise", "advancement", "manager", "supervisor", "title"],
    "syn_demotion": ["demot*", "downgrad*", "reassign*", "lowered", "rank", "junior"],
    "syn_fired": ["fired", "terminat*", "dismiss*", "sacked", "discharg*", "misconduct"],
    "syn_reduced_hours": ["parttime", "paycut", "reduced", "shifts", "underemploy*", "hourly"],
    "syn_more_hours": ["overtime", "doubles", "extra", "weekends", "longhours", "nightshift*"],
    "syn_career_change": ["career", "retrain*", "occupation", "switched", "apprentice*"],
    "syn_return_to_work": ["returned", "rejoin*", "reinstat*", "comeback", "reentry"],
    "syn_leave_of_absence": ["leave", "sabbatical", "maternity", "paternity", "disability"],
    "syn_workplace_conflict": ["grievance", "harass*", "coworker*", "boss", "dispute*"],
    "syn_business_closure": ["closure", "shutdown", "bankrupt*", "shuttered", "liquidat*"],
    "syn_eviction": ["evict*", "landlord", "lockout", "notice", "unlawful"],
    "syn_foreclosure": ["foreclos*", "mortgage*", "repossess*", "lender", "default*"],
    "syn_moved_in_with_family": ["parents", "sister", "brother", "relatives", "cousin*"],
    "syn_homelessness": ["homeless*", "unhoused", "streets", "car", "sleeping"],
    "syn_new_residence": ["moved", "apartment", "lease", "relocat*", "newplace"],
    "syn_institutional_stay": ["shelter*", "hospital*", "rehab*", "facility", "inpatient"],
    "syn_roommate_change": ["roommate*", "housemate*", "tenant*", "sublet*", "moveout"],
    "syn_disaster_displacement": ["flood*", "fire", "hurricane*", "tornado*", "displac*"],
    "syn_downsizing": ["smaller", "cheaper", "condo", "sold", "downsizing"],
}

# Noun phrases that realise each label in synthetic sentences.
CUE_WORDS = {
    "retirement": ["retirement", "pension paperwork", "retirement party"],
    "layoffs": ["layoff", "plant layoffs", "furlough"],
    "syn_job_start": ["new job", "onboarding week", "job offer"],
    "syn_promotion": ["promotion", "raise", "supervisor role"],
    "syn_demotion": ["demotion", "reassignment", "downgrade"],
    "syn_fired": ["firing", "termination", "dismissal"],
    "syn_reduced_hours": ["reduced schedule", "paycut", "lost shifts"],
    "syn_more_hours": ["overtime", "extra shifts", "nightshifts"],
    "syn_career_change": ["career change", "retraining course", "apprenticeship"],
    "syn_return_to_work": ["return to work", "reinstatement", "comeback"],
    "syn_leave_of_absence": ["medical leave", "sabbatical", "disability leave"],
    "syn_workplace_conflict": ["grievance", "dispute with the boss", "harassment complaint"],
    "syn_business_closure": ["store closure", "bankruptcy", "shutdown"],
    "syn_eviction": ["eviction", "landlord notice", "lockout"],
    "syn_foreclosure": ["foreclosure", "mortgage default", "repossession"],
    "syn_moved_in_with_family": ["move to the parents' house", "stay with a sister", "move in with relatives"],
    "syn_homelessness": ["time living on the streets", "nights sleeping in a car", "period of being unhoused"],
    "syn_new_residence": ["move to a new apartment", "new lease", "relocation"],
    "syn_institutional_stay": ["shelter stay", "hospital admission", "rehab program"],
    "syn_roommate_change": ["new roommate", "housemate leaving", "sublet arrangement"],
    "syn_disaster_displacement": ["flood", "house fire", "hurricane damage"],
    "syn_downsizing": ["move to a smaller place", "sale of the house", "cheaper condo"],
}

FILLER = [
    "The decedent was described by friends as quiet, careful with money and slow to ask for help.",
    "Neighbors recalled seeing the person walking a small dog along the river most mornings.",
    "A relative said the family had not spoken in several weeks before the incident occurred.",
    "Records show a routine doctor visit earlier in the spring with no new prescriptions noted.",
    "The report notes no prior contact with local services or crisis lines in the past year.",
    "A former classmate mentioned that the person enjoyed fishing and building model boats.",
    "Friends said the person had seemed tired lately but still talked about plans for summer.",
    "The investigator found letters and unopened bills stacked neatly on the kitchen table.",
    "There was no indication of alcohol or other substances in the initial toxicology summary.",
    "A sibling described their recent phone calls as short, polite and somewhat distant.",
    "The household included a long-term partner and two teenage children at the time.",
    "The medical summary lists a history of chronic back pain and poor sleep for years.",
    "A neighbor said the lights in the house had stayed on late into the night all week.",
    "The partner reported that the person had stopped attending the weekly card game.",
    "According to the narrative, the person left a short note addressed to the children.",
    "The person had recently sold a car and paid off a small debt to a close friend.",
]

CUE_TEMPLATES = [
    "Family members said the {w} had weighed on the person for several months",
    "According to the report, the {w} came without much warning to anyone close",
    "The partner told investigators about the {w} and the stress that followed it",
    "Notes from the interview mention the {w} as a recent change in daily routine",
    "A close friend said the person talked often about the {w} during the last year",
]

SHORT_TEMPLATES = [
    "The person talked about the {a} and the {b} during a call last week.",
    "Records mention the {a} shortly before the {b} in the final month.",
    "A friend said the {a} and later the {b} changed everything for them.",
    "Family noted the {a}, and soon after that the {b}, in the report.",
]


def write_yaml_config(path, text):
    path.write_text(text.lstrip("\n"), encoding="utf-8")


def q(s):
    return json.dumps(s, ensure_ascii=False)


def label_block(labels, indent):
    pad = " " * indent
    out = []
    for value, key, tip in labels:
        out.append(f"{pad}- value: {value}\n{pad}  key: {q(key)}\n{pad}  tooltip: {q(tip)}")
    return "\n".join(out)


def keyword_block(indent):
    pad = " " * indent
    out = []
    for label, pats in KEYWORDS.items():
        out.append(f"{pad}{label}: [{', '.join(q(p) for p in pats)}]")
    return "\n".join(out)


def sample_labels(rng):
    work = [w[0] for w in WORK]
    housing = [h[0] for h in HOUSING]
    chosen = rng.sample(work, rng.randint(1, 2)) + rng.sample(housing, rng.randint(0, 2))
    return chosen


def long_document(rng, labels):
    sentences = [rng.choice(CUE_TEMPLATES).format(w=rng.choice(CUE_WORDS[label])) + "." for label in labels]
    sentences += rng.sample(FILLER, 13 - len(sentences))
    rng.shuffle(sentences)
    return " ".join(sentences)


def short_document(rng, labels):
    a = rng.choice(CUE_WORDS[labels[0]])
    b = rng.choice(CUE_WORDS[labels[-1]] if len(labels) > 1 else [w for w in CUE_WORDS[labels[0]] if w != a])
    return rng.choice(SHORT_TEMPLATES).format(a=a, b=b)


def task_configs():
    assert sum(len(v) for v in KEYWORDS.values()) == 118, sum(len(v) for v in KEYWORDS.values())
    assert len(WORK) == 13 and len(HOUSING) == 9
    keys = [k for _, k, _ in WORK + HOUSING]
    assert len(set(keys)) == 22

    rng = random.Random(20221)
    d1 = ROOT / "task1_long_doc"
    d1.mkdir(parents=True, exist_ok=True)
    with open(d1 / "data.jsonl", "w", encoding="utf-8") as f:
        for i in range(20):
            labels = sample_labels(rng)
            doc = long_document(rng, labels)
            f.write(json.dumps({"id": f"long_{i:03d}", "text": doc, "source": "synthetic"}, ensure_ascii=False) + "\n")
    write_yaml_config(d1 / "config.yaml", f"""
# Long-document life-transition labeling with keyword highlights.
# Documents are synthetic stand-ins; labels other than retirement and layoffs
# carry a syn_ prefix.
task_name: "Life transitions: long documents"
data_files: [data.jsonl]
id_field: id
text_field: text
schemes:
  - name: work_transitions
    kind: multiselect
    description: "Which work-related transitions does the document describe?"
    options:
{label_block(WORK, 6)}
  - name: housing_transitions
    kind: multiselect
    description: "Which housing-related transitions does the document describe?"
    required: false
    options:
{label_block(HOUSING, 6)}
instructions:
  html: "<p>Select every transition the narrative describes. Highlights are hints and are sometimes placed at random.</p>"
highlight:
  decoy_rate: 0.05
  keyword_groups:
{keyword_block(4)}
assignment:
  annotations_per_instance: 0
  ordering: original
login_mode: both
server:
  port: 8000
  output_dir: annotation_output
  admin_password: change-me
  completion_code: LT-LONG-DONE
""")

    d2 = ROOT / "task2_short_doc"
    d2.mkdir(parents=True, exist_ok=True)
    with open(d2 / "data.csv", "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", "text", "source"])
        for i in range(40):
            labels = sample_labels(rng)
            w.writerow([f"short_{i:03d}", short_document(rng, labels), "synthetic"])
    write_yaml_config(d2 / "config.yaml", f"""
# Single-sentence variant of the long-document task; every field here can be
# produced by `annoserve init` (see wizard_answers.txt).
task_name: "Life transitions: single sentences"
data_files: [data.csv]
id_field: id
text_field: text
schemes:
  - name: work_transitions
    kind: multiselect
    description: "Which work-related transitions does the sentence describe?"
    options:
{label_block(WORK, 6)}
  - name: housing_transitions
    kind: multiselect
    description: "Which housing-related transitions does the sentence describe?"
    required: false
    options:
{label_block(HOUSING, 6)}
instructions:
  url: "https://example.org/codebook"
highlight:
  decoy_rate: 0.1
  keyword_groups:
{keyword_block(4)}
assignment:
  annotations_per_instance: 2
  max_instances_per_annotator: 20
  ordering: active_learning
  seed: 7
active_learning:
  target_scheme: work_transitions
  retrain_every: 20
  random_ratio: 0.2
  min_labels_to_start: 10
  confidence: least_confidence
  seed: 11
login_mode: url_argument
server:
  port: 8001
  output_dir: annotation_output
  admin_user: admin
  admin_password: change-me
  completion_code: LT-SHORT-DONE
""")

    # Answers for `annoserve init --answers`, in prompt order.
    answers = [
        "# wizard answers reproducing config.yaml",
        "Life transitions: single sentences",
        "data.csv",
        "id",
        "text",
        "",  # no image fields
        "2",
    ]
    for name, desc, labels, required in [
        ("work_transitions", "Which work-related transitions does the sentence describe?", WORK, True),
        ("housing_transitions", "Which housing-related transitions does the sentence describe?", HOUSING, False),
    ]:
        answers += [name, "multiselect", desc, ", ".join(v for v, _, _ in labels), "y"]
        for _, key, tip in labels:
            answers += [key, tip]
        answers.append("y" if required else "n")
    answers += ["url", "https://example.org/codebook", "url_argument", "2", "20", "active_learning", "7", "y",
                str(len(KEYWORDS))]
    for label, pats in KEYWORDS.items():
        answers += [label, ", ".join(pats)]
    answers += ["0.1", "work_transitions", "20", "0.2", "10", "least_confidence", "11",
                "8001", "annotation_output", "admin", "change-me", "LT-SHORT-DONE"]
    (d2 / "wizard_answers.txt").write_text("\n".join(answers) + "\n", encoding="utf-8")


def gallery():
    rng = random.Random(3)
    sentences = [
        "The new phone battery lasts two full days.",
        "Customer service never answered my emails.",
        "The hotel room was clean but very small.",
        "This recipe turned out better than expected.",
        "The train was late again this morning.",
        "I would watch this film a second time.",
        "The update made the app slower on my laptop.",
        "Staff at the clinic were patient and kind.",
        "The package arrived with a broken corner.",
        "The concert sound was muddy in the back rows.",
        "The museum guide explained everything clearly.",
        "My order was missing one item.",
    ]

    d = ROOT / "likert"
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "data.csv", "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", "text", "domain"])
        for i, s in enumerate(sentences):
            w.writerow([f"lk{i:02d}", s, rng.choice(["retail", "travel", "media"])])
    write_yaml_config(d / "config.yaml", """
task_name: "Sentiment intensity (Likert)"
data_files: [data.csv]
id_field: id
text_field: text
schemes:
  - name: sentiment
    kind: likert
    description: "How positive is this sentence?"
    likert_size: 5
    min_label: very negative
    max_label: very positive
quality_control:
  pre_surveys:
    - title: Consent
      template: consent
server:
  output_dir: annotation_output
  admin_password: change-me
""")

    d = ROOT / "free_text"
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "data.jsonl", "w", encoding="utf-8") as f:
        for i, s in enumerate(sentences[:8]):
            f.write(json.dumps({"id": f"ft{i:02d}", "text": s}) + "\n")
    write_yaml_config(d / "config.yaml", """
task_name: "Paraphrase writing"
data_files: [data.jsonl]
id_field: id
text_field: text
schemes:
  - name: paraphrase
    kind: free_text
    description: "Rewrite the sentence in your own words."
quality_control:
  post_surveys:
    - title: About you
      template: demographics
      questions:
        - name: difficulty
          kind: likert
          description: "How hard was the task?"
          likert_size: 5
          min_label: easy
          max_label: hard
server:
  output_dir: annotation_output
  admin_password: change-me
""")

    d = ROOT / "best_worst"
    d.mkdir(parents=True, exist_ok=True)
    words = ["joyful", "content", "furious", "uneasy", "calm", "thrilled", "gloomy", "bored", "eager", "tense",
             "serene", "bitter"]
    with open(d / "data.jsonl", "w", encoding="utf-8") as f:
        for i in range(6):
            picks = rng.sample(words, 4)
            rec = {"id": f"bw{i:02d}"}
            rec.update({f"item_{j + 1}": picks[j] for j in range(4)})
            f.write(json.dumps(rec) + "\n")
    write_yaml_config(d / "config.yaml", """
task_name: "Best-worst scaling of emotion words"
data_files: [data.jsonl]
id_field: id
text_field: [item_1, item_2, item_3, item_4]
schemes:
  - name: intensity
    kind: best_worst
    description: "Pick the most and the least intense word."
    options: [item_1, item_2, item_3, item_4]
server:
  output_dir: annotation_output
  admin_password: change-me
""")

    d = ROOT / "multiselect_multitask"
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "data.csv", "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", "text"])
        for i, s in enumerate(sentences):
            w.writerow([f"mm{i:02d}", s])
    write_yaml_config(d / "config.yaml", """
task_name: "Topic and sentiment (multitask)"
data_files: [data.csv]
id_field: id
text_field: text
schemes:
  - name: topics
    kind: multiselect
    description: "Which topics does the sentence mention?"
    options:
      - value: product
        key: "p"
        tooltip: "A physical or digital product"
      - value: service
        key: "s"
        tooltip: "People or processes serving a customer"
      - value: travel
        key: "t"
        tooltip: "Trips, transport or lodging"
      - value: entertainment
        key: "e"
        tooltip: "Films, music, shows or museums"
  - name: sentiment
    kind: radio
    description: "Overall sentiment"
    options:
      - value: positive
        key: "1"
      - value: neutral
        key: "2"
      - value: negative
        key: "3"
  - name: confidence
    kind: dropdown
    description: "How sure are you?"
    required: false
    options: [low, medium, high]
server:
  output_dir: annotation_output
  admin_password: change-me
""")

    d = ROOT / "image_rating"
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "data.csv", "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", "image", "caption"])
        for i in range(8):
            w.writerow([f"im{i:02d}", f"https://picsum.photos/seed/annoserve{i}/480/320", f"Photo {i + 1}"])
    write_yaml_config(d / "config.yaml", """
task_name: "Image quality rating"
data_files: [data.csv]
id_field: id
text_field: image
image_fields: [image]
schemes:
  - name: quality
    kind: likert
    description: "Rate the photo's technical quality."
    likert_size: 7
    min_label: poor
    max_label: excellent
  - name: comment
    kind: free_text
    description: "Anything notable? (optional)"
    required: false
server:
  output_dir: annotation_output
  admin_password: change-me
""")

    d = ROOT / "pairwise"
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "data.jsonl", "w", encoding="utf-8") as f:
        for i in range(6):
            a, b = rng.sample(sentences, 2)
            f.write(json.dumps({"id": f"pw{i:02d}", "text_a": a, "text_b": b}) + "\n")
    (d / "layout.html").write_text(
        "<section class=\"pair\">\n  <div>{{ text_a }}</div>\n  <p>vs</p>\n  <div>{{ text_b }}</div>\n</section>\n"
        "{{ preference }}\n{{ progress }}\n",
        encoding="utf-8")
    write_yaml_config(d / "config.yaml", """
task_name: "Pairwise preference"
data_files: [data.jsonl]
id_field: id
text_field: [text_a, text_b]
template_override: layout.html
schemes:
  - name: preference
    kind: radio
    description: "Which sentence is more informative?"
    options:
      - value: a
        display: First
        key: "a"
      - value: b
        display: Second
        key: "b"
      - value: tie
        display: About the same
        key: "t"
server:
  output_dir: annotation_output
  admin_password: change-me
""")

    d = ROOT / "span_dialogue"
    d.mkdir(parents=True, exist_ok=True)
    dialogues = [
        ["Hi, I need to change my flight to Boston.", "Sure, which date works for you?", "Friday morning, please."],
        ["Can I return these shoes?", "Yes, within thirty days with a receipt.", "Great, I bought them on Monday."],
        ["Is the café open on Sunday?", "Only until two in the afternoon.", "Thanks, we will come early."],
        ["My internet keeps dropping.", "Have you restarted the router today?", "Twice, it still fails after an hour."],
        ["Where is gate 12?", "Turn left after security, near the bookshop.", "Perfect, thank you."],
    ]
    with open(d / "data.jsonl", "w", encoding="utf-8") as f:
        for i, turns in enumerate(dialogues):
            f.write(json.dumps({"id": f"dl{i:02d}", "turns": turns}) + "\n")
    write_yaml_config(d / "config.yaml", """
task_name: "Dialogue span labeling"
data_files: [data.jsonl]
id_field: id
text_field: turns
schemes:
  - name: entities
    kind: span
    description: "Mark places, times and products mentioned in the dialogue."
    required: false
    options:
      - value: place
        key: "p"
      - value: time
        key: "t"
      - value: product
        key: "r"
  - name: resolved
    kind: radio
    description: "Was the customer's request resolved?"
    options: ["yes", "no", "unclear"]
server:
  output_dir: annotation_output
  admin_password: change-me
""")


def catalog():
    entries = [
        ("likert", "Likert rating of single sentences, with a consent page", "data.csv"),
        ("free_text", "Free-text paraphrases with a demographics post-survey", "data.jsonl"),
        ("best_worst", "Best-worst scaling over four-word sets", "data.jsonl"),
        ("multiselect_multitask", "Several schemes per item: multiselect, radio and dropdown", "data.csv"),
        ("image_rating", "Rating images referenced by URL", "data.csv"),
        ("pairwise", "Pairwise comparison with a custom layout", "data.jsonl"),
        ("span_dialogue", "Span labeling over dialogue turns", "data.jsonl"),
        ("task1_long_doc", "Life-transition labels over long synthetic narratives with keyword highlights",
         "data.jsonl"),
        ("task2_short_doc", "The same 22 labels over single sentences, with active learning", "data.csv"),
    ]
    lines = ["templates:"]
    for tid, desc, data in entries:
        lines += [f"  - id: {tid}", f"    description: {q(desc)}", "    config: config.yaml", f"    data: {data}"]
    (ROOT / "catalog.yaml").write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    ROOT.mkdir(exist_ok=True)
    task_configs()
    gallery()
    catalog()
