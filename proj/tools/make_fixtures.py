#!/usr/bin/env python3
"""Regenerates the bundled synthetic data and the test fixtures.

Writes data/vocabulary.synthetic.tsv, data/ethnicity_map.tsv,
data/event_groups/gi_hemorrhage.tsv, data/synthetic_corpus/*.xml,
tests/fixtures/* and the golden screening files under tests/golden/.
The golden screening CSV is computed here, straight from the corpus design,
without going through the C++ code.
"""

import math
import os
import random
import sys
from xml.sax.saxutils import escape, quoteattr

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

# ---------------------------------------------------------------- vocabulary

SOC = {
    "gi": "91000001", "nervous": "91000002", "general": "91000003", "skin": "91000004",
    "infection": "91000005", "musculo": "91000006", "resp": "91000007", "psych": "91000008",
    "metab": "91000009", "invest": "91000010", "vascular": "91000011", "cardiac": "91000012",
    "blood": "91000013", "renal": "91000014", "eye": "91000015", "hepato": "91000016",
}

# (text, soc, [llt texts])
PTS = [
    ("Nausea", "gi", ["Nausea and vomiting", "Queasy", "Feeling sick"]),
    ("Vomiting", "gi", ["Emesis", "Vomit"]),
    ("Diarrhoea", "gi", ["Diarrhea", "Loose stools"]),
    ("Constipation", "gi", []),
    ("Abdominal pain", "gi", ["Stomach ache", "Belly pain"]),
    ("Abdominal pain upper", "gi", ["Epigastric pain"]),
    ("Dyspepsia", "gi", ["Indigestion", "Heartburn"]),
    ("Gastrooesophageal reflux disease", "gi", ["Gastroesophageal reflux disease", "GERD"]),
    ("Gastrointestinal haemorrhage", "gi", ["Gastrointestinal hemorrhage", "GI bleed",
                                             "Gastrointestinal bleeding"]),
    ("Upper gastrointestinal haemorrhage", "gi", ["Upper gastrointestinal hemorrhage",
                                                   "Upper GI bleeding"]),
    ("Lower gastrointestinal haemorrhage", "gi", ["Lower gastrointestinal hemorrhage",
                                                   "Lower GI bleeding"]),
    ("Haematochezia", "gi", ["Hematochezia", "Blood in stool"]),
    ("Melaena", "gi", ["Melena", "Black stools"]),
    ("Haematemesis", "gi", ["Hematemesis"]),
    ("Rectal haemorrhage", "gi", ["Rectal bleeding"]),
    ("Stomatitis", "gi", []),
    ("Dry mouth", "gi", []),
    ("Flatulence", "gi", []),
    ("Abdominal distension", "gi", ["Bloating"]),
    ("Gastritis", "gi", []),
    ("Pancreatitis", "gi", []),
    ("Dysphagia", "gi", []),
    ("Headache", "nervous", ["Head ache", "Cephalalgia"]),
    ("Dizziness", "nervous", ["Lightheadedness"]),
    ("Somnolence", "nervous", ["Drowsiness"]),
    ("Paraesthesia", "nervous", ["Paresthesia", "Tingling"]),
    ("Syncope", "nervous", ["Fainting"]),
    ("Tremor", "nervous", []),
    ("Migraine", "nervous", []),
    ("Dysgeusia", "nervous", ["Taste disturbance"]),
    ("Neuropathy peripheral", "nervous", ["Peripheral neuropathy"]),
    ("Seizure", "nervous", ["Convulsion"]),
    ("Fatigue", "general", ["Tiredness"]),
    ("Pyrexia", "general", ["Fever"]),
    ("Asthenia", "general", ["Weakness"]),
    ("Oedema peripheral", "general", ["Peripheral edema", "Ankle swelling"]),
    ("Injection site reaction", "general", []),
    ("Chest pain", "general", []),
    ("Influenza like illness", "general", ["Flu-like symptoms"]),
    ("Rash", "skin", ["Skin rash"]),
    ("Pruritus", "skin", ["Itching"]),
    ("Alopecia", "skin", ["Hair loss"]),
    ("Urticaria", "skin", ["Hives"]),
    ("Dry skin", "skin", []),
    ("Erythema", "skin", []),
    ("Hyperhidrosis", "skin", ["Excessive sweating"]),
    ("Nasopharyngitis", "infection", ["Common cold"]),
    ("Upper respiratory tract infection", "infection", ["URTI"]),
    ("Urinary tract infection", "infection", ["UTI"]),
    ("Influenza", "infection", []),
    ("Bronchitis", "infection", []),
    ("Sinusitis", "infection", []),
    ("Pneumonia", "infection", []),
    ("Gastroenteritis", "infection", []),
    ("Herpes zoster", "infection", ["Shingles"]),
    ("Cellulitis", "infection", []),
    ("Arthralgia", "musculo", ["Joint pain"]),
    ("Back pain", "musculo", []),
    ("Myalgia", "musculo", ["Muscle pain"]),
    ("Pain in extremity", "musculo", []),
    ("Muscle spasms", "musculo", ["Muscle cramp"]),
    ("Osteoarthritis", "musculo", []),
    ("Rheumatoid arthritis", "musculo", []),
    ("Osteoporosis", "musculo", []),
    ("Cough", "resp", []),
    ("Dyspnoea", "resp", ["Dyspnea", "Shortness of breath"]),
    ("Oropharyngeal pain", "resp", ["Sore throat"]),
    ("Epistaxis", "resp", ["Nosebleed"]),
    ("Nasal congestion", "resp", []),
    ("Asthma", "resp", []),
    ("Chronic obstructive pulmonary disease", "resp", ["COPD"]),
    ("Pulmonary embolism", "resp", []),
    ("Insomnia", "psych", ["Sleeplessness"]),
    ("Anxiety", "psych", []),
    ("Depression", "psych", []),
    ("Major depressive disorder", "psych", []),
    ("Decreased appetite", "metab", ["Loss of appetite"]),
    ("Hypoglycaemia", "metab", ["Hypoglycemia"]),
    ("Hyperglycaemia", "metab", ["Hyperglycemia"]),
    ("Type 2 diabetes mellitus", "metab", ["Diabetes mellitus type 2"]),
    ("Hypokalaemia", "metab", ["Hypokalemia"]),
    ("Dehydration", "metab", []),
    ("Hypercholesterolaemia", "metab", ["Hypercholesterolemia"]),
    ("Alanine aminotransferase increased", "invest", ["ALT increased"]),
    ("Aspartate aminotransferase increased", "invest", ["AST increased"]),
    ("Weight increased", "invest", ["Weight gain"]),
    ("Weight decreased", "invest", ["Weight loss"]),
    ("Blood creatinine increased", "invest", []),
    ("Blood pressure increased", "invest", []),
    ("Haemoglobin decreased", "invest", ["Hemoglobin decreased"]),
    ("Hypertension", "vascular", ["High blood pressure"]),
    ("Hypotension", "vascular", ["Low blood pressure"]),
    ("Hot flush", "vascular", []),
    ("Deep vein thrombosis", "vascular", ["DVT"]),
    ("Haematoma", "vascular", ["Hematoma"]),
    ("Atrial fibrillation", "cardiac", []),
    ("Palpitations", "cardiac", []),
    ("Tachycardia", "cardiac", []),
    ("Bradycardia", "cardiac", []),
    ("Cardiac failure", "cardiac", ["Heart failure"]),
    ("Myocardial infarction", "cardiac", ["Heart attack"]),
    ("Angina pectoris", "cardiac", []),
    ("Anaemia", "blood", ["Anemia"]),
    ("Neutropenia", "blood", []),
    ("Thrombocytopenia", "blood", []),
    ("Acute kidney injury", "renal", []),
    ("Haematuria", "renal", ["Hematuria"]),
    ("Pollakiuria", "renal", ["Frequent urination"]),
    ("Dysuria", "renal", []),
    ("Chronic kidney disease", "renal", []),
    ("Vision blurred", "eye", ["Blurred vision"]),
    ("Dry eye", "eye", []),
    ("Conjunctivitis", "eye", []),
    ("Hepatic function abnormal", "hepato", []),
    ("Cholelithiasis", "hepato", ["Gallstones"]),
    ("Hepatotoxicity", "hepato", []),
]

GROUP_PTS = ["Gastrointestinal haemorrhage", "Upper gastrointestinal haemorrhage",
             "Lower gastrointestinal haemorrhage"]


def build_vocabulary():
    rows = []
    pt_code = {}
    llts = []
    for i, (text, soc, llt_texts) in enumerate(PTS):
        code = "9000%04d" % (i + 1)
        pt_code[text] = code
        rows.append((code, text, "PT", "", SOC[soc], "CS%07d" % (i + 1)))
        for t in llt_texts:
            llts.append((t, code, SOC[soc]))
    for j, (text, parent, soc) in enumerate(llts):
        rows.append(("9010%04d" % (j + 1), text, "LLT", parent, soc, ""))
    if len(rows) != 200:
        sys.exit("vocabulary has %d entries, expected 200" % len(rows))
    return rows, pt_code


def write(path, text):
    path = os.path.join(ROOT, path)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


# -------------------------------------------------------------- xml writing

def study_xml(s):
    """s: dict describing one study (see corpus builders below)."""
    out = ['<?xml version="1.0" encoding="UTF-8"?>', "<clinical_study>"]
    out.append("  <required_header>")
    out.append("    <url>https://clinicaltrials.gov/study/%s</url>" % s["nct"])
    out.append("  </required_header>")
    out.append("  <id_info><nct_id>%s</nct_id></id_info>" % s["nct"])
    out.append("  <brief_title>%s</brief_title>" % escape(s.get("title", "Study " + s["nct"])))
    if s.get("official_title"):
        out.append("  <official_title>%s</official_title>" % escape(s["official_title"]))
    if s.get("summary"):
        out.append("  <brief_summary><textblock>%s</textblock></brief_summary>" % escape(s["summary"]))
    out.append("  <overall_status>%s</overall_status>" % s.get("status", "Completed"))
    out.append("  <phase>%s</phase>" % s.get("phase", "Phase 3"))
    out.append("  <study_type>Interventional</study_type>")
    for c in s.get("conditions", []):
        out.append("  <condition>%s</condition>" % escape(c))
    for iv in s.get("interventions", []):
        out.append("  <intervention>")
        out.append("    <intervention_type>%s</intervention_type>" % iv["type"])
        out.append("    <intervention_name>%s</intervention_name>" % escape(iv["name"]))
        for a in iv["arms"]:
            out.append("    <arm_group_label>%s</arm_group_label>" % escape(a))
        out.append("  </intervention>")
    el = s.get("eligibility", {"criteria": "Adults with the condition.", "gender": "All",
                               "min": "18 Years", "max": "75 Years", "healthy": "No"})
    if el:
        out.append("  <eligibility>")
        if el.get("criteria"):
            out.append("    <criteria><textblock>%s</textblock></criteria>" % escape(el["criteria"]))
        if el.get("gender"):
            out.append("    <gender>%s</gender>" % el["gender"])
        if el.get("min"):
            out.append("    <minimum_age>%s</minimum_age>" % el["min"])
        if el.get("max"):
            out.append("    <maximum_age>%s</maximum_age>" % el["max"])
        if el.get("healthy"):
            out.append("    <healthy_volunteers>%s</healthy_volunteers>" % el["healthy"])
        out.append("  </eligibility>")
    for a in s["arms"]:
        out.append("  <arm_group group_id=%s>" % quoteattr(a["id"]))
        out.append("    <arm_group_label>%s</arm_group_label>" % escape(a["label"]))
        if a.get("type"):
            out.append("    <arm_group_type>%s</arm_group_type>" % a["type"])
        out.append("  </arm_group>")
    if s.get("countries"):
        out.append("  <location_countries>")
        for c in s["countries"]:
            out.append("    <country>%s</country>" % escape(c))
        out.append("  </location_countries>")
    if s.get("results", True):
        out.append("  <clinical_results>")
        out.append("    <participant_flow>")
        for a in s["arms"]:
            if a.get("started") is not None:
                out.append("      <started group_id=%s count=\"%d\"/>" % (quoteattr(a["id"]), a["started"]))
        out.append("    </participant_flow>")
        for a in s["arms"]:
            b = a.get("baseline")
            if not b:
                continue
            out.append("    <baseline group_id=%s>" % quoteattr(a["id"]))
            out.append("      <sex female=\"%d\" male=\"%d\"/>" % (b["female"], b["male"]))
            out.append("      <age mean=\"%.1f\" sd=\"%.1f\" units=\"Years\"/>" % (b["mean"], b["sd"]))
            for cat, n in b["ethnicity"]:
                out.append("      <ethnicity category=%s count=\"%d\"/>" % (quoteattr(cat), n))
            out.append("    </baseline>")
        out.append("    <reported_events>")
        for kind, tag in (("serious", "serious_events"), ("other", "other_events")):
            events = [e for e in s.get("events", []) if e["seriousness"] == kind]
            if not events:
                continue
            out.append("      <%s>" % tag)
            by_cat = {}
            for e in events:
                by_cat.setdefault(e.get("category", "General disorders"), []).append(e)
            for cat, evs in by_cat.items():
                out.append("        <category>")
                out.append("          <title>%s</title>" % escape(cat))
                for e in evs:
                    out.append("          <event>")
                    out.append("            <sub_title>%s</sub_title>" % escape(e["term"]))
                    for ref, affected, at_risk in e["counts"]:
                        out.append("            <counts group_id=%s subjects_affected=\"%d\" subjects_at_risk=\"%d\"/>"
                                   % (quoteattr(ref), affected, at_risk))
                    out.append("          </event>")
                out.append("        </category>")
            out.append("      </%s>" % tag)
        out.append("    </reported_events>")
        out.append("  </clinical_results>")
    out.append("</clinical_study>")
    return "\n".join(out) + "\n"


# ------------------------------------------------------ synthetic case corpus

PRODUCTS = [("Zelvatinib", "Drug"), ("Oradexumab", "Biological"), ("Cormelastat", "Drug")]

# Reported strings that normalize onto one of GROUP_PTS (exact, LLT, grading
# suffix or a fuzzy misspelling) and ones that must not.
GROUP_TERMS = ["Gastrointestinal haemorrhage", "Gastrointestinal hemorrhage", "GI bleed",
               "Upper gastrointestinal haemorrhage", "Upper GI bleeding", "Lower GI bleeding",
               "Gastrointestinal haemorrhage G2", "Gastrointestinal haemorhage",
               "Lower gastrointestinal haemorrhage"]
OTHER_TERMS = ["Nausea", "Nausea?", "Nausea G1", "Vomiting", "Headache", "Diarrhea", "Melaena",
               "Haematochezia", "Abdominal pain", "Fatigue", "Dizziness", "Rash",
               "Nasopharyngitis", "Back pain", "Xylophage syndrome", "Rectal bleeding"]
ETHNICITY = ["Hispanic or Latino", "Not Hispanic or Latino", "Unknown or Not Reported"]
CONDITIONS = ["Rheumatoid arthritis", "Osteoarthritis", "Type 2 diabetes mellitus", "Hypertension",
              "Atrial fibrillation", "Chronic obstructive pulmonary disease", "Osteoporosis",
              "Major depressive disorder", "Rheumatoid Arthritis G2", "Hypertention"]
COUNTRIES = ["United States", "Canada", "Germany", "France", "Spain", "Japan", "Brazil"]


def make_arm(rng, gid, label, arm_type, started, group_rate):
    """Arm with AE design: a list of (term, seriousness, affected)."""
    events = []
    n_terms = rng.randint(1, 2)
    for term in rng.sample(GROUP_TERMS, n_terms):
        affected = sum(1 for _ in range(started) if rng.random() < group_rate / n_terms)
        events.append((term, rng.choice(["serious", "other"]), affected))
    for term in rng.sample(OTHER_TERMS, 3):
        events.append((term, "other", rng.randint(0, started // 5)))
    female = rng.randint(started // 4, 3 * started // 4)
    h = rng.randint(0, started // 3)
    u = rng.randint(0, started // 10)
    baseline = {"female": female, "male": started - female, "mean": rng.uniform(40, 70),
                "sd": rng.uniform(6, 14),
                "ethnicity": [(ETHNICITY[0], h), (ETHNICITY[1], started - h - u), (ETHNICITY[2], u)]}
    return {"id": gid, "label": label, "type": arm_type, "started": started, "design": events,
            "baseline": baseline}


def assemble(study):
    """Fills in the XML-level event list from per-arm designs."""
    events = {}
    for a in study["arms"]:
        for term, kind, affected in a.get("design", []):
            key = (term, kind)
            cat = "Gastrointestinal disorders" if term in GROUP_TERMS else "General disorders"
            ev = events.setdefault(key, {"term": term, "seriousness": kind, "category": cat, "counts": []})
            ev["counts"].append((a["id"], affected, a["started"] or 0))
    study["events"] = list(events.values())
    return study


def synthetic_corpus():
    rng = random.Random(20240611)
    studies = []
    serial = [0]

    def nct():
        serial[0] += 1
        return "NCT9%07d" % (serial[0] * 37 % 10000000)

    rates = {"Zelvatinib": 0.06, "Oradexumab": 0.035, "Cormelastat": 0.02}
    placebo_labels = [("Placebo", "Placebo Comparator"), ("Matching placebo BID", None),
                      ("Placebo tablets", "Placebo Comparator")]
    phases = ["Phase 3", "Phase 3", "Phase 4", "Phase 3", "Phase 4", "Phase 3", "Phase 3", "Phase 3"]
    for p, (name, ptype) in enumerate(PRODUCTS):
        for k in range(8):
            arms = []
            dose_arms = 2 if k == 1 else 1
            labels = []
            for d in range(dose_arms):
                label = "%s %d mg" % (name, (d + 1) * 10 * (k % 3 + 1)) if dose_arms > 1 else "%s" % name
                labels.append(label)
                arms.append(make_arm(rng, "G%d" % (len(arms) + 1), label, "Experimental",
                                     rng.randint(60, 320), rates[name] * rng.uniform(0.6, 1.5)))
            pl_label, pl_type = placebo_labels[(p + k) % 3]
            arms.append(make_arm(rng, "G%d" % (len(arms) + 1), pl_label, pl_type,
                                 rng.randint(50, 300), 0.02 * rng.uniform(0.3, 1.6)))
            ivs = [{"type": ptype, "name": name, "arms": labels},
                   {"type": "Drug", "name": "Placebo", "arms": [pl_label]}]
            phase = phases[k]
            if name == "Zelvatinib" and k == 5:
                phase = "Phase 2"
            if name == "Oradexumab" and k == 6:
                phase = "Phase 2/Phase 3"
            studies.append(assemble({
                "nct": nct(), "title": "%s versus placebo, study %d" % (name, k + 1),
                "official_title": "A randomized, double-blind, placebo-controlled trial of %s" % name,
                "summary": "Synthetic study for pipeline testing.",
                "phase": phase, "conditions": [CONDITIONS[(p * 8 + k) % len(CONDITIONS)]],
                "interventions": ivs, "arms": arms,
                "countries": sorted(rng.sample(COUNTRIES, rng.randint(1, 3))),
            }))
    # Head-to-head study, no placebo arm.
    a = make_arm(rng, "G1", "Zelvatinib 20 mg", "Experimental", 150, 0.05)
    c = make_arm(rng, "G2", "Cormelastat 40 mg", "Active Comparator", 148, 0.02)
    studies.append(assemble({
        "nct": nct(), "title": "Zelvatinib versus Cormelastat", "phase": "Phase 3",
        "conditions": ["Rheumatoid arthritis"],
        "interventions": [{"type": "Drug", "name": "Zelvatinib", "arms": ["Zelvatinib 20 mg"]},
                          {"type": "Drug", "name": "Cormelastat", "arms": ["Cormelastat 40 mg"]}],
        "arms": [a, c], "countries": ["Germany"],
    }))
    # Sham-controlled device study plus an arm with no reported denominator.
    s1 = make_arm(rng, "G1", "Oradexumab", "Experimental", 90, 0.03)
    s2 = make_arm(rng, "G2", "Sham injection", "Sham Comparator", 88, 0.02)
    s3 = make_arm(rng, "G3", "Oradexumab open-label extension", "Experimental", None or 1, 0.0)
    s3["started"] = None
    s3["design"] = []
    s3["baseline"] = None
    studies.append(assemble({
        "nct": nct(), "title": "Oradexumab sham-controlled study", "phase": "Phase 3",
        "conditions": ["Osteoarthritis"],
        "interventions": [{"type": "Biological", "name": "Oradexumab",
                           "arms": ["Oradexumab", "Oradexumab open-label extension"]},
                          {"type": "Procedure", "name": "Sham injection", "arms": ["Sham injection"]}],
        "arms": [s1, s2, s3], "countries": ["Japan"],
    }))
    # Excluded studies: one per rule.
    base_arm = lambda: [make_arm(rng, "G1", "Zelvatinib", "Experimental", 100, 0.05),
                        make_arm(rng, "G2", "Placebo", "Placebo Comparator", 100, 0.02)]
    ivs = [{"type": "Drug", "name": "Zelvatinib", "arms": ["Zelvatinib"]}]
    studies.append(assemble({"nct": nct(), "status": "Withheld", "conditions": ["Hypertension"],
                             "interventions": ivs, "arms": base_arm()}))
    studies.append(assemble({"nct": nct(), "conditions": ["Hypertension"], "eligibility": {},
                             "interventions": ivs, "arms": base_arm()}))
    studies.append(assemble({"nct": nct(), "conditions": [], "interventions": ivs, "arms": base_arm()}))
    return studies


def included(s):
    return s.get("status", "Completed") != "Withheld" and s.get("eligibility", True) != {} and s["conditions"]


PHASE_TEXT = {"Phase 2": "phase2", "Phase 3": "phase3", "Phase 4": "phase4",
              "Phase 2/Phase 3": "phase2_3"}


def screening_oracle(studies):
    """Straight-line computation of the screening CSV for the GI group."""
    group_terms = set(GROUP_TERMS)
    arms = []
    for s in studies:
        if not included(s):
            continue
        for i, a in enumerate(s["arms"]):
            key = "%s_%03d" % (s["nct"], i + 1)
            if not a["started"]:
                continue
            n_ae = sum(x[2] for x in a["design"] if x[0] in group_terms)
            assert n_ae <= a["started"]
            placebo = "placebo" in a["label"].lower().split() or a["type"] == "Placebo Comparator"
            if placebo:
                label = "Placebo"
            else:
                label = a["label"]
                for iv in s["interventions"]:
                    if a["label"] in iv["arms"] and iv["name"] != "Placebo":
                        label = iv["name"]
                        break
            arms.append({"product": label, "phase": PHASE_TEXT[s.get("phase", "Phase 3")], "nct": s["nct"],
                         "key": key, "n_ae": n_ae, "n": a["started"], "p": n_ae / a["started"],
                         "placebo": placebo})
    arms.sort(key=lambda r: (r["product"], r["nct"], r["key"]))
    pl = sorted(r["p"] for r in arms if r["placebo"])
    h = (len(pl) - 1) * 0.75
    lo = math.floor(h)
    hi = min(lo + 1, len(pl) - 1)
    q75 = pl[lo] + (h - lo) * (pl[hi] - pl[lo])
    mx = pl[-1]
    pooled_ae = sum(r["n_ae"] for r in arms if r["placebo"])
    pooled_n = sum(r["n"] for r in arms if r["placebo"])

    def odds(a, an, b, bn):
        cells = [a, an - a, b, bn - b]
        corrected = 0 in cells
        if corrected:
            cells = [c + 0.5 for c in cells]
        return (cells[0] * cells[3]) / (cells[1] * cells[2]), corrected

    lines = ["product,phase,nct_id,arm_key,n_ae,n_started,p_arm,is_placebo,q75,max_placebo,"
             "exceeds_q75,exceeds_max,or_vs_placebo,or_corrected"]
    tf = lambda b: "true" if b else "false"
    for r in arms:
        o, corr = odds(r["n_ae"], r["n"], pooled_ae, pooled_n)
        lines.append(",".join([r["product"], r["phase"], r["nct"], r["key"], str(r["n_ae"]), str(r["n"]),
                               "%.6f" % r["p"], tf(r["placebo"]), "%.6f" % q75, "%.6f" % mx,
                               tf(r["p"] > q75), tf(r["p"] > mx), "%.6f" % o, tf(corr)]))
    return "\n".join(lines) + "\n", arms


# ------------------------------------------------------------ small fixtures

def minimal_study():
    return {
        "nct": "NCT00000001", "title": "Minimal study", "official_title": "A minimal synthetic study",
        "summary": "One arm, one adverse event.", "phase": "Phase 2",
        "conditions": ["Hypertension"],
        "interventions": [{"type": "Drug", "name": "Drug X", "arms": ["Drug X 10 mg"]}],
        "eligibility": {"criteria": "Adults.", "gender": "All", "min": "18 Years", "max": "65 Years",
                        "healthy": "No"},
        "arms": [{"id": "G1", "label": "Drug X 10 mg", "type": "Experimental", "started": 50,
                  "baseline": {"female": 20, "male": 30, "mean": 52.5, "sd": 9.0,
                               "ethnicity": [("Hispanic or Latino", 5), ("Not Hispanic or Latino", 45)]}}],
        "events": [{"term": "Nausea", "seriousness": "other", "category": "Gastrointestinal disorders",
                    "counts": [("G1", 3, 50)]}],
        "countries": ["United States"],
    }


def two_arm_study():
    return {
        "nct": "NCT00000002", "title": "Two-arm study", "phase": "Phase 3",
        "conditions": ["Osteoarthritis"],
        "interventions": [{"type": "Drug", "name": "Drug Y", "arms": ["Drug Y"]}],
        "arms": [{"id": "G1", "label": "Drug Y", "type": "Experimental", "started": 100},
                 {"id": "G2", "label": "Placebo", "type": "Placebo Comparator", "started": 98}],
        "events": [{"term": "Headache", "seriousness": "other", "category": "Nervous system disorders",
                    "counts": [("G1", 7, 100), ("G2", 4, 98), ("G9", 1, 20)]},
                   {"term": "Syncope", "seriousness": "serious", "category": "Nervous system disorders",
                    "counts": [("G1", 1, 100)]}],
    }


def corpus10():
    out = []
    for i in range(10):
        s = {
            "nct": "NCT1000%04d" % (i + 1), "title": "Corpus study %d" % (i + 1),
            "conditions": ["Hypertension"] if i != 7 else [],
            "status": "Withheld" if i == 3 else "Completed",
            "interventions": [{"type": "Drug", "name": "Drug Z", "arms": ["Drug Z"]}],
            "arms": [{"id": "G1", "label": "Drug Z", "type": "Experimental", "started": 40 + i},
                     {"id": "G2", "label": "Placebo", "type": "Placebo Comparator", "started": 41 + i}],
            "events": [{"term": "Nausea", "seriousness": "other", "counts": [("G1", i, 40 + i), ("G2", 1, 41 + i)]}],
        }
        out.append(s)
    return out


def main():
    rows, pt_code = build_vocabulary()
    lines = ["code\ttext\tlevel\tparent_pt_code\tsoc_code\tumls_cui"]
    lines += ["\t".join(r) for r in rows]
    write("data/vocabulary.synthetic.tsv", "\n".join(lines) + "\n")

    eth = [("Hispanic or Latino", "hispanic_or_latino"), ("Hispanic", "hispanic_or_latino"),
           ("Latino", "hispanic_or_latino"), ("Hispanic/Latino", "hispanic_or_latino"),
           ("Latina", "hispanic_or_latino"), ("Latinx", "hispanic_or_latino"),
           ("Not Hispanic or Latino", "not_hispanic_or_latino"),
           ("Not Hispanic/Latino", "not_hispanic_or_latino"), ("Non-Hispanic", "not_hispanic_or_latino"),
           ("Non Hispanic or Latino", "not_hispanic_or_latino"), ("Not Latino", "not_hispanic_or_latino"),
           ("Unknown or Not Reported", "unknown_or_not_reported"), ("Unknown", "unknown_or_not_reported"),
           ("Not Reported", "unknown_or_not_reported"), ("Not reported/unknown", "unknown_or_not_reported"),
           ("Declined to answer", "unknown_or_not_reported"), ("Missing", "unknown_or_not_reported")]
    write("data/ethnicity_map.tsv",
          "raw_value\tharmonized_category\n" + "".join("%s\t%s\n" % e for e in eth))

    write("data/event_groups/gi_hemorrhage.tsv",
          "group_name\tpt_code\n" + "".join("gi_hemorrhage\t%s\n" % pt_code[t] for t in GROUP_PTS))

    studies = synthetic_corpus()
    corpus_dir = os.path.join(ROOT, "data/synthetic_corpus")
    if os.path.isdir(corpus_dir):
        for f in os.listdir(corpus_dir):
            os.remove(os.path.join(corpus_dir, f))
    for s in studies:
        write("data/synthetic_corpus/%s.xml" % s["nct"], study_xml(s))

    golden, arms = screening_oracle(studies)
    write("tests/golden/gi_hemorrhage.screening.csv", golden)
    design = ["nct_id\tarm_key\tproduct\tphase\tis_placebo\tn_ae\tn_started"]
    for r in arms:
        design.append("\t".join([r["nct"], r["key"], r["product"], r["phase"],
                                 "true" if r["placebo"] else "false", str(r["n_ae"]), str(r["n"])]))
    write("tests/golden/synthetic_arms.tsv", "\n".join(design) + "\n")

    write("tests/fixtures/study-minimal.xml", study_xml(minimal_study()))
    write("tests/fixtures/study-two-arms.xml", study_xml(two_arm_study()))
    for s in corpus10():
        write("tests/fixtures/corpus10/%s.xml" % s["nct"], study_xml(s))
    ok = corpus10()[:2]
    write("tests/fixtures/malformed/a.xml", study_xml(ok[0]))
    write("tests/fixtures/malformed/b.xml", study_xml(ok[1]))
    write("tests/fixtures/malformed/broken.xml",
          '<?xml version="1.0"?>\n<clinical_study><id_info><nct_id>NCT19999999</nct_id></id_info>\n'
          "<brief_title>Truncated\n")


if __name__ == "__main__":
    main()
