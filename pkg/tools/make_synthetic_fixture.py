"""Regenerate the bundled synthetic telecom fixture under src/acr/data/.

Ten "exact" items share distinctive vocabulary with their gold chunk. Ten
"paraphrase" items use everyday wording that shares no token with their gold
chunk; only the synonym lexicon connects them. The script checks those
construction rules before writing anything.

    python tools/make_synthetic_fixture.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from acr.lexical import tokenize  # noqa: E402

OUT = ROOT / "src" / "acr" / "data"

# (qa_id, doc_id, title, chunk text, question, options, gold label, gold explanation)
EXACT = [
    ("E01", "ts38913-urllc", "URLLC requirements",
     "URLLC requirements. The user plane latency target for URLLC is 0.5 ms in each direction, uplink and "
     "downlink. Reliability target: 99.999 percent success for a 32 byte packet within 1 ms.",
     "What is the URLLC user plane latency target in each direction?",
     ["0.5 ms each direction", "4 ms", "10 ms", "20 ms"], 1,
     "URLLC targets a user plane latency of 0.5 ms in each direction for uplink and downlink."),
    ("E02", "ts38913-embb", "eMBB peak data rate",
     "eMBB peak data rate. IMT-2020 requires a downlink peak data rate of 20 Gbit/s and an uplink peak data "
     "rate of 10 Gbit/s. Peak spectral efficiency targets are 30 bit/s/Hz downlink and 15 bit/s/Hz uplink.",
     "What downlink peak data rate does IMT-2020 require for eMBB?",
     ["1 Gbit/s", "100 Mbit/s", "20 Gbit/s downlink", "5 Gbit/s"], 3,
     "The eMBB requirement sets the downlink peak data rate at 20 Gbit/s."),
    ("E03", "ts38913-mmtc", "mMTC connection density",
     "mMTC connection density. The minimum connection density requirement is 1000000 devices per square "
     "kilometre in the urban deployment scenario.",
     "What is the minimum connection density requirement for mMTC?",
     ["10000 devices", "1000000 devices per square kilometre", "500 devices", "100000 devices"], 2,
     "mMTC requires at least 1000000 devices per square kilometre."),
    ("E04", "ts38323-sn", "PDCP sequence numbers",
     "PDCP sequence numbers. For data radio bearers the PDCP SN length is configurable as 12 bits or 18 bits; "
     "signalling radio bearers always use a 12 bit PDCP SN.",
     "Which PDCP SN lengths are configurable for data radio bearers?",
     ["7 bits", "16 bits", "32 bits", "12 bits or 18 bits"], 4,
     "Data radio bearers can use a 12 bit or 18 bit PDCP SN."),
    ("E05", "ts38211-numerology", "NR numerology",
     "NR numerology. Subcarrier spacing equals 15 kHz multiplied by 2 to the power mu; FR1 data channels use "
     "15, 30 or 60 kHz, while FR2 uses 60 or 120 kHz.",
     "Which subcarrier spacing values does FR2 use for data channels in NR numerology?",
     ["15 kHz", "60 or 120 kHz", "240 kHz", "480 kHz"], 2,
     "FR2 data channels use 60 or 120 kHz subcarrier spacing."),
    ("E06", "ts38331-states", "RRC states",
     "RRC states. NR defines three RRC states: RRC_IDLE, RRC_INACTIVE and RRC_CONNECTED. RRC_INACTIVE keeps "
     "the UE context stored in the RAN to cut signalling on resume.",
     "How many RRC states does NR define, and which state keeps the UE context in the RAN?",
     ["three RRC states", "two states", "four states", "five states"], 1,
     "NR defines three RRC states and RRC_INACTIVE keeps the UE context in the RAN."),
    ("E07", "ts38321-harq", "HARQ processes",
     "HARQ processes. NR supports up to 16 HARQ processes per cell for downlink and 16 for uplink; "
     "asynchronous HARQ is used in both directions.",
     "How many HARQ processes per cell does NR support for downlink?",
     ["8 processes", "4 processes", "16 HARQ processes", "32 processes"], 3,
     "NR supports up to 16 HARQ processes per cell in the downlink."),
    ("E08", "ts38213-ssb", "SSB periodicity",
     "SSB periodicity. The SS/PBCH block periodicity is configurable among 5, 10, 20, 40, 80 and 160 ms; "
     "initial cell search assumes 20 ms.",
     "What SS/PBCH block periodicity does initial cell search assume?",
     ["5 ms", "20 ms periodicity", "80 ms", "160 ms"], 2,
     "Initial cell search assumes an SS/PBCH block periodicity of 20 ms."),
    ("E09", "ts23501-sst", "Standardized slice types",
     "Standardized slice types. The SST value 1 denotes eMBB, SST value 2 denotes URLLC, SST value 3 denotes "
     "MIoT and SST value 4 denotes V2X.",
     "Which SST value denotes V2X in standardized slice types?",
     ["value 1", "value 3", "value 2", "SST value 4"], 4,
     "Standardized SST value 4 denotes V2X services."),
    ("E10", "ts23501-5qi", "5QI mapping",
     "5QI mapping. Standardized 5QI 1 carries conversational voice with a packet delay budget of 100 ms, and "
     "5QI 82 is a delay critical GBR flow for discrete automation with a 10 ms budget.",
     "Which 5QI carries conversational voice?",
     ["5QI 1 conversational voice", "5QI 82", "5QI 9", "5QI 5"], 1,
     "Standardized 5QI 1 is used for conversational voice."),
]

PARAPHRASE = [
    ("P01", "ts38300-daps", "DAPS handover",
     "DAPS handover. Interruption time: zero milliseconds, since source cell keeps serving until target cell "
     "access completes.",
     "Which pause occurs when a phone hops between towers?",
     ["fifty milliseconds", "two seconds", "zero milliseconds interruption", "one frame"], 3,
     "With DAPS handover the interruption time is zero milliseconds because the source cell keeps serving."),
    ("P02", "ts23501-slicing", "Network slicing",
     "Network slicing. UE registers maximum eight S-NSSAI values simultaneously, so eight slices "
     "simultaneously.",
     "How many isolated virtual partitions can a subscriber join at once?",
     ["sixteen slices", "eight slices simultaneously", "four slices", "unlimited slices"], 2,
     "A UE can register up to eight S-NSSAI values, so eight network slices simultaneously."),
    ("P03", "ts24301-psm", "eDRX and PSM",
     "eDRX and PSM. Extended DRX cycles up to 10485.76 seconds let IoT devices skip paging occasions; PSM adds "
     "deeper dormancy between periodic TAU updates.",
     "What keeps a battery-powered sensor asleep for long stretches?",
     ["longer timers", "higher power", "faster scanning", "extended DRX cycles"], 4,
     "Extended DRX cycles and PSM let IoT devices sleep for long periods."),
    ("P04", "ts33501-suci", "SUCI",
     "SUCI. Concealed SUPI: home network public key encrypts MSIN using ECIES profiles; null scheme only under "
     "test.",
     "Which identifier hides a subscriber's permanent number over the air?",
     ["IMEI broadcast", "MSISDN paging", "ECIES concealed SUCI", "GUTI reuse"], 3,
     "The SUCI conceals the SUPI by encrypting the MSIN with an ECIES profile."),
    ("P05", "ts38300-sidelink", "NR sidelink",
     "NR sidelink. V2X sidelink over PC5 interface; mode 1 resource allocation scheduled by gNB, mode 2 "
     "autonomous selection by UE.",
     "What lets a phone talk to a car nearby without the tower?",
     ["Uu uplink", "PC5 sidelink interface", "X2 backhaul", "N2 signalling"], 2,
     "V2X sidelink communication uses the PC5 interface without going through the base station."),
    ("P06", "ts38300-ca", "Carrier aggregation",
     "Carrier aggregation. Up to 16 CCs aggregated, PCell plus SCells; cross-carrier scheduling optional.",
     "Which feature lets a handset borrow spectrum chunks from two carriers together?",
     ["dual antennas", "beam sweeping", "bandwidth parts", "PCell plus SCells"], 4,
     "Carrier aggregation combines a PCell plus SCells across component carriers."),
    ("P07", "ts38304-paging", "Paging",
     "Paging. AMF triggers NG-RAN paging across tracking area list; UE monitors paging occasions within paging "
     "frames.",
     "How is an idle handset found when a call arrives?",
     ["cell broadcast", "random access", "tracking area list", "polling loop"], 3,
     "The AMF pages the idle UE across its tracking area list."),
    ("P08", "ts22261-uac", "Unified access control",
     "Unified access control. UAC barring factor and barring time per access category; gNB broadcasts "
     "parameters through SIB1.",
     "What stops a busy cell from drowning in connection attempts?",
     ["power boost", "UAC barring factor", "beam steering", "handover delay"], 2,
     "Unified access control applies a barring factor and barring time per access category."),
    ("P09", "ts23501-qos", "QoS flows",
     "QoS flows. GBR QoS flow guarantees GFBR via QoS rules; QFI marks packets, SMF installs rules at UPF.",
     "Which mechanism lets the operator carve out guaranteed speed for a video stream?",
     ["best effort", "traffic shaping", "packet duplication", "GFBR via QoS rules"], 4,
     "A GBR QoS flow guarantees the GFBR through QoS rules installed by the SMF."),
    ("P10", "ts23501-tsn", "5G TSN integration",
     "5G TSN integration. 5GS acts as TSN bridge; gPTP time synchronization through NW-TT and DS-TT "
     "translators.",
     "What lets a factory robot's clock agree with the plant controller?",
     ["GPS receivers", "manual offsets", "gPTP bridge synchronization", "NTP polling"], 3,
     "The 5GS acts as a TSN bridge and carries gPTP time synchronization."),
]

LEXICON = [
    ("pause", "interruption time"),
    ("hops between towers", "handover"),
    ("isolated virtual partitions", "network slices"),
    ("battery-powered sensor", "PSM"),
    ("asleep for long stretches", "extended DRX"),
    ("permanent number", "concealed SUPI"),
    ("identifier hides", "SUCI"),
    ("car nearby", "V2X sidelink"),
    ("without the tower", "PC5"),
    ("borrow spectrum chunks", "carrier aggregation"),
    ("idle handset", "paging"),
    ("drowning in connection attempts", "access barring"),
    ("guaranteed speed", "GBR QoS flow"),
    ("factory robot", "TSN"),
    ("clock agree", "time synchronization"),
]

# Background documents: everyday operator prose that the everyday-worded
# questions match lexically, none of it naming a paraphrase answer.
FILLER = [
    ("ops-faq-phones", "Operator FAQ: phones",
     "What is the first thing to check when a phone cannot connect? The operator support team asks which "
     "tower the phone was near and how strong the signal was. A subscriber can restart the phone, which "
     "often helps. When the phone still cannot connect, the team looks at the tower logs for that time."),
    ("ops-faq-billing", "Operator FAQ: billing",
     "How is a subscriber billed for a video stream? The operator counts the data used by the stream and "
     "applies the plan in force. What the subscriber sees on the bill is the total for the month, with a "
     "note for any roaming use."),
    ("ops-guide-towers", "Field guide: towers",
     "A tower site hosts antennas for several operators. When a tower goes down, phones nearby move to "
     "another tower. Which tower a phone picks depends on signal strength and load. The field team can "
     "check a tower remotely before sending a crew, and how long a repair takes depends on access to the site."),
    ("ops-guide-sensors", "Field guide: sensors",
     "A battery in a remote sensor can last for years when the sensor sends small reports. The operator "
     "can see which sensors are reporting and when each one last sent data. What drains a battery fastest "
     "is a poor signal, since the sensor repeats its reports."),
    ("ops-guide-cars", "Field guide: connected cars",
     "A connected car talks to the operator network for maps, music and updates. When the car is in a "
     "tunnel it loses the signal for a while. What the driver notices is a short gap in music, not a lost "
     "call, because the car buffers data ahead of time."),
    ("ops-guide-factory", "Field guide: factories",
     "In a factory the operator installs a private network with a small cell on each floor. The plant "
     "controller talks to each robot over the network. What matters most to the plant manager is that a "
     "robot never stops because of a dropped connection."),
    ("ops-guide-busy", "Field guide: busy cells",
     "A busy cell at a stadium sees many phones at once. When the crowd arrives, connection attempts rise "
     "sharply and some phones wait. How the operator plans for a busy cell is to add temporary capacity "
     "with a mobile tower for the day."),
    ("ops-guide-calls", "Field guide: calls",
     "When a call arrives for a subscriber, the network has to reach the phone wherever it is. A phone that "
     "is idle still listens from time to time. What a caller hears while the network looks for the phone is "
     "the ringing tone."),
    ("ops-guide-video", "Field guide: video",
     "Video is the largest share of traffic on the operator network. A video stream adapts its speed to "
     "the signal, which is why quality drops in a crowd. Which plan a subscriber has decides how much video "
     "can be watched each month."),
    ("ops-guide-identity", "Field guide: identity",
     "Each subscriber has a number and a SIM card. When a phone is lost, the subscriber can ask the operator "
     "to block the SIM card. What the operator never shares over the air is the personal data of the "
     "subscriber."),
    ("ops-guide-spectrum", "Field guide: spectrum",
     "Spectrum is bought by each operator at auction. Which carriers a phone can use depends on the bands "
     "it supports. How much spectrum an operator holds shapes the speed that subscribers see at busy hours."),
    ("ops-handbook", "Operations handbook",
     "This handbook describes how the operations team works. The team runs the network day and night. "
     "When an alarm is raised, the duty engineer checks which site raised it and what changed at that time. "
     "Most alarms clear by themselves within minutes; the engineer notes them in the log and moves on. "
     "For alarms that do not clear, the engineer opens a ticket, calls the field team and informs the "
     "service desk so that subscribers who call in can be told what is happening. "
     "The handbook also covers planned work. Planned work is announced a week ahead and is done at night, "
     "when traffic is low. Before planned work starts, the engineer checks that a rollback is ready and "
     "that the work will not affect a tower that is already down. After the work, the engineer checks the "
     "alarms again and closes the ticket. "
     "Capacity reviews are held each month. The team looks at which sites were busy, how often phones "
     "waited for a connection and what the traffic trend is. A site that is busy for many hours in a month "
     "is added to the upgrade plan. The plan is shared with the radio team, which decides whether a new "
     "cell, more spectrum or a new tower is the best fix. "
     "The handbook ends with contacts. The duty engineer can be reached at any time through the service "
     "desk. The field team is reached by radio when phones do not work at a site. Vendors are called only "
     "through the duty manager, who keeps the vendor contract numbers and knows what each contract covers. "
     "Every call to a vendor is logged with the time, the site and the reason for the call, so that the "
     "monthly review can see how often each vendor was needed and how long each fix took. "
     "New engineers shadow a senior engineer for a month before taking a shift alone, and every engineer "
     "takes a refresher course once a year on the alarm system and on the escalation steps."),
    ("ops-faq-roaming", "Operator FAQ: roaming",
     "What happens when a subscriber travels abroad? The phone attaches to a partner network and the "
     "operator is told which country the subscriber is in. How much a call costs abroad depends on the "
     "plan, and a text message is sent to the phone when it arrives."),
    ("ops-faq-coverage", "Operator FAQ: coverage",
     "Which places have weak coverage? Coverage is weaker inside thick buildings, in valleys and far from "
     "a tower. When a subscriber reports weak coverage, the operator checks the coverage map for that "
     "street and how many other phones reported the same problem."),
    ("ops-faq-speed", "Operator FAQ: speed",
     "How fast is the connection? The speed a phone sees depends on the signal, on how many other phones "
     "share the cell and on the plan. What the operator promises is a typical speed, not a guaranteed one, "
     "for most plans."),
    ("ops-faq-outage", "Operator FAQ: outages",
     "What should a subscriber do during an outage? The operator posts updates when a tower or a cable "
     "fails. A phone may show full bars yet fail to connect, because the fault is in the core network "
     "rather than at the tower."),
    ("ops-faq-devices", "Operator FAQ: devices",
     "Which devices work on the network? Most phones sold in the country work, and the operator keeps a "
     "page that shows which older phones lose service when a network is switched off. A sensor or a car "
     "module needs a plan for machines."),
    ("ops-guide-energy", "Field guide: energy",
     "A tower uses most of its energy in the radio units. At night, when traffic is low, the operator can "
     "switch off some carriers to save energy. How much is saved depends on the site and on the weather, "
     "since cooling is a large share of the bill."),
    ("ops-guide-events", "Field guide: events",
     "For a concert or a match the operator brings a mobile tower on a truck. Which site needs one is "
     "decided weeks ahead. When the event ends, phones leave in a rush and the mobile tower is taken away "
     "the next day."),
    ("ops-guide-rural", "Field guide: rural sites",
     "A rural tower covers a wide zone with few subscribers. The operator often shares such a tower with "
     "another operator to cut costs. What limits rural speed is the link from the tower back to the core, "
     "which can be a microwave hop."),
    ("ops-guide-indoor", "Field guide: indoor",
     "Inside an office, a phone can struggle to reach the tower outside. The operator can install small "
     "cells on each floor. Which floors need one is found by walking the building with a test phone and "
     "noting when the signal drops."),
    ("ops-guide-security", "Field guide: security",
     "The operator protects the network against fraud and attacks. When a phone behaves strangely, for "
     "example sending many messages at once, the security team can block it. What the team looks for is a "
     "pattern across many phones, not one event."),
    ("ops-faq-drops", "Operator FAQ: dropped calls",
     "Why does a call drop when a phone moves between towers? A short pause can occur when the phone "
     "hops from one tower to the next on a fast train. Which towers cover a rail line is planned so that "
     "the pause is rare."),
    ("ops-faq-music", "Operator FAQ: streaming",
     "Why does music pause on the way to work? When a phone moves between towers, the stream may pause "
     "for a moment if the new tower is busy. The operator adds towers along busy roads to avoid it."),
]

ENTITIES = [
    ("daps", "DAPS handover", ["handover"]),
    ("zero_int", "zero milliseconds interruption", ["interruption time"]),
    ("slices", "network slices", ["network slicing"]),
    ("eight", "eight slices simultaneously", []),
    ("psm", "PSM", ["power saving mode"]),
    ("edrx", "extended DRX cycles", ["extended DRX", "eDRX"]),
    ("supi", "SUPI", ["concealed SUPI"]),
    ("suci", "ECIES concealed SUCI", ["SUCI"]),
    ("sidelink", "V2X sidelink", ["sidelink"]),
    ("pc5", "PC5 sidelink interface", ["PC5"]),
    ("ca", "carrier aggregation", []),
    ("pcell", "PCell plus SCells", []),
    ("paging", "paging", []),
    ("tal", "tracking area list", []),
    ("barring", "access barring", ["unified access control"]),
    ("uac", "UAC barring factor", []),
    ("gbr", "GBR QoS flow", []),
    ("gfbr", "GFBR via QoS rules", []),
    ("tsn", "TSN", ["time sensitive networking"]),
    ("sync", "time synchronization", []),
    ("gptp", "gPTP bridge synchronization", []),
    ("urllc", "URLLC", ["ultra-reliable low-latency communication"]),
    ("bands", "spectrum bands", []),
    ("demands", "user demands", []),
    ("interference", "interference levels", []),
]

TRIPLES = [
    ("daps", "achieves", "zero_int"),
    ("slices", "are capped at", "eight"),
    ("psm", "works alongside", "edrx"),
    ("supi", "is hidden by", "suci"),
    ("sidelink", "runs over", "pc5"),
    ("ca", "combines", "pcell"),
    ("paging", "covers", "tal"),
    ("barring", "is tuned by", "uac"),
    ("gbr", "enforces", "gfbr"),
    ("tsn", "relies on", "sync"),
    ("sync", "is carried by", "gptp"),
    ("bands", "assigned to", "demands"),
    ("bands", "interferes with", "interference"),
]


def check() -> None:
    corpus_tokens = {}
    for _, doc_id, _, text, *_ in EXACT + PARAPHRASE:
        corpus_tokens[doc_id] = set(tokenize(text))
    for doc_id, _, text in FILLER:
        corpus_tokens[doc_id] = set(tokenize(text))
    lex_phrases = [tuple(tokenize(p)) for p, _ in LEXICON]

    for qa_id, doc_id, _, text, question, options, gold, _ in PARAPHRASE:
        q = set(tokenize(question))
        shared = q & corpus_tokens[doc_id]
        assert not shared, f"{qa_id}: question shares {shared} with its gold chunk"
        assert gold != 1, f"{qa_id}: gold must not be the tie-break label"
        gold_toks = set(tokenize(options[gold - 1]))
        assert gold_toks <= corpus_tokens[doc_id], f"{qa_id}: gold option not covered by chunk"
        for other, toks in corpus_tokens.items():
            if other != doc_id and gold_toks & toks:
                raise AssertionError(f"{qa_id}: gold tokens {gold_toks & toks} also in {other}")
        qt = tokenize(question)
        assert any(
            tuple(qt[i:i + len(p)]) == p for p in lex_phrases for i in range(len(qt))
        ), f"{qa_id}: no lexicon phrase in question"

    for qa_id, doc_id, _, text, question, options, gold, _ in EXACT:
        gold_toks = set(tokenize(options[gold - 1]))
        assert gold_toks <= corpus_tokens[doc_id], f"{qa_id}: gold option not covered by chunk"
        qt = tokenize(question)
        for p in lex_phrases:
            assert not any(tuple(qt[i:i + len(p)]) == p for i in range(len(qt))), f"{qa_id}: lexicon hit"
        for i, opt in enumerate(options, start=1):
            if i != gold:
                assert len(set(tokenize(opt)) & corpus_tokens[doc_id]) < len(gold_toks), f"{qa_id}: option {i}"


def write() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    with (OUT / "corpus.jsonl").open("w", encoding="utf-8") as fh:
        for kind, rows in (("exact", EXACT), ("paraphrase", PARAPHRASE)):
            for _, doc_id, title, text, *_ in rows:
                rec = {"doc_id": doc_id, "title": title, "text": text, "source": "3GPP-synthetic",
                       "metadata": {"fixture": kind}}
                fh.write(json.dumps(rec) + "\n")
        for doc_id, title, text in FILLER:
            rec = {"doc_id": doc_id, "title": title, "text": text, "source": "operator-notes",
                   "metadata": {"fixture": "filler"}}
            fh.write(json.dumps(rec) + "\n")
    with (OUT / "qa.jsonl").open("w", encoding="utf-8") as fh:
        for kind, rows in (("exact", EXACT), ("paraphrase", PARAPHRASE)):
            for qa_id, doc_id, _, _, question, options, gold, explanation in rows:
                rec = {
                    "qa_id": qa_id,
                    "question": question,
                    "options": [{"label": f"option {i}", "text": t} for i, t in enumerate(options, start=1)],
                    "answer_label": f"option {gold}",
                    "explanation": explanation,
                    "category": kind,
                    "gold_doc": doc_id,
                }
                fh.write(json.dumps(rec) + "\n")
    with (OUT / "lexicon.tsv").open("w", encoding="utf-8") as fh:
        fh.write("# everyday phrase<TAB>3GPP term\n")
        for phrase, canon in LEXICON:
            fh.write(f"{phrase}\t{canon}\n")
    with (OUT / "graph.tsv").open("w", encoding="utf-8") as fh:
        for eid, name, aliases in ENTITIES:
            fh.write(f"E\t{eid}\t{name}\t{'|'.join(aliases)}\n")
        for s, p, o in TRIPLES:
            fh.write(f"T\t{s}\t{p}\t{o}\n")


if __name__ == "__main__":
    check()
    write()
    print(f"wrote fixture to {OUT}")
