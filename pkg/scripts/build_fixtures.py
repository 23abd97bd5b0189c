"""Regenerate the shipped fixture files for sample dialogues A and B.

Writes the dialogue corpus, gold annotations, model predictions, the replay
cache that reproduces those predictions through the chat-completion client,
and the normative prompt-message fixtures. Run from the repository root:

    python scripts/build_fixtures.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from convground import fixtures
from convground.dialogue import load_dialogues
from convground.llm import CompletionRequest, request_hash
from convground.prompts import (
    CLASSIFICATION_EXAMPLES,
    CLASSIFICATION_SYSTEM,
    EXTRACTION_EXAMPLES,
    EXTRACTION_SYSTEM,
    build_classification_prompt,
    build_extraction_prompt,
)

OUT = Path(__file__).resolve().parents[1] / "src" / "convground" / "fixtures"

S, P = "seeker", "provider"

DIALOGUE_A = {
    "id": "A",
    "domain": "media",
    "turns": [
        (S, "Hello, could you tell me what the media dataset is about?"),
        (P, "Hi, yes sure."),
        (P, "The dataset contains data on time travel works of fiction, including novels, short stories, films, and TV series."),
        (S, "How many rows are there in the dataset?"),
        (P, "500"),
        (S, "What are the attributes of the dataset?"),
        (P, "year, title, author, short text description"),
        (S, "Is there no column for the type of the work? How then can I determine if a work is a novel or a film?"),
        (P, "oh, sorry one column was missed. I should correct it:"),
        (P, "Attributes: year, title, author, short text description, category"),
        (S, "ok got it"),
        (P, ":blush:"),
        (S, "How many unique authors are there in the dataset?"),
        (P, "it's a good question but takes time to get it. I try to answer it meanwhile"),
        (S, "no worries"),
        (P, "found it 417"),
        (S, "great! good to know."),
    ],
}

DIALOGUE_B = {
    "id": "B",
    "domain": "geography",
    "turns": [
        (S, 'I wanna know about the dataset "Geography"'),
        (P, "What do you wanna know about it?."),
        (S, "What is the dataset about in general?"),
        (P, "The dataset contains information about 98 nature parks in Germany. You can find in this dataset the name of the park, its year of establishment, its area etc."),
        (S, "thanks, so if I understood correctly the dataset contains 3 columns, right? name of park, year, area"),
        (P, "There are other attributes as well. Here are all the attributes: park name, the German state where the park is in, year of establishment, area in km2, and short text summary."),
        (S, "great!"),
        (S, "could you tell me about the number of records in the dataset?"),
        (P, "There are 98 rows in the dataset, corresponding to the 98 parks."),
        (S, "OK"),
        (S, "how about the values? like the min and max of year and area of the parks?"),
        (P, "The earliest dated park is Lüneburg Heath (Lüneburger Heide), established in 1921. The most recent ones are Lahn-Dill Highlands and Zittau Mountains, both established in 2007."),
        (P, "The smallest park is Siebengebirge at 48km2. The largest one is Southern Black Forest at 3940km2"),
        (S, "Fine!"),
    ],
}

# (turn_index, label, knowledge) per annotated turn; gold side.
GOLD = {
    "A": [
        (2, "explicit", {"table_domain": "media"}),
        (4, "implicit", {"table_content": "time travel works of fiction"}),
        (6, "implicit", {"row_count": 500}),
        (8, "clarification", {"column_names": ["year", "title", "author", "short text description"]}),
        (11, "explicit", {"column_names": ["year", "title", "author", "short text description", "category"]}),
        (17, "explicit", {"column_name": "author", "distinct_count": 417}),
    ],
    "B": [
        (2, "implicit", {"table_domain": "geography"}),
        (5, "clarification", {"table_content": "nature parks in Germany", "column_names": ["park name", "year", "area"]}),
        (7, "explicit", {"column_names": ["park name", "year", "area", "state", "short text summary"]}),
        (10, "explicit", {"row_count": 98}),
        (14, "explicit", {"column_info": [
            {"column_name": "year", "min_value": 1921, "max_value": 2007},
            {"column_name": "area", "min_value": 48, "max_value": 3940},
        ]}),
    ],
}

# Prediction side: label, plus the knowledge exactly as the model printed it
# (single-quote rendering) and its canonical-dict equivalent.
PREDICTIONS = {
    "A": [
        (2, "clarification",
         "{'table_content': 'media dataset'}",
         {"table_content": "media dataset"}),
        (4, "implicit",
         "{'table_domain': 'time travel works of fiction'}",
         {"table_domain": "time travel works of fiction"}),
        (6, "explicit",
         "{'row_count': 500}",
         {"row_count": 500}),
        (8, "implicit",
         "{'column_names': ['year', 'title', 'author', 'short text description', 'type of work']}",
         {"column_names": ["year", "title", "author", "short text description", "type of work"]}),
        (11, "explicit",
         "{'column_names': ['year', 'title', 'author', 'short text description', 'category']}",
         {"column_names": ["year", "title", "author", "short text description", "category"]}),
        (17, "explicit",
         "{'column_name': 'author', 'distinct_count': 417}",
         {"column_name": "author", "distinct_count": 417}),
    ],
    "B": [
        (2, "clarification",
         "{'table_domain': 'Geography'}",
         {"table_domain": "Geography"}),
        (5, "explicit",
         "{'table_content': 'information about 98 nature parks in Germany', "
         "'column_names': ['name of park', 'year', 'area']}",
         {"table_content": "information about 98 nature parks in Germany",
          "column_names": ["name of park", "year", "area"]}),
        (7, "explicit",
         "{'column_names': ['park name', 'German state', 'year of establishment', "
         "'area in km2', 'short text summary']}",
         {"column_names": ["park name", "German state", "year of establishment",
                           "area in km2", "short text summary"]}),
        (10, "explicit",
         "{'row_count': 98}",
         {"row_count": 98}),
        (14, "explicit",
         "{'column_name': 'year of establishment', 'min_value': 1921, 'max_value': 2007}, "
         "{'column_name': 'area in km2', 'min_value': 48, 'max_value': 3940}",
         {"column_info": [
             {"column_name": "year of establishment", "min_value": 1921, "max_value": 2007},
             {"column_name": "area in km2", "min_value": 48, "max_value": 3940},
         ]}),
    ],
}


def write_jsonl(path: Path, records) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def main() -> None:
    write_jsonl(
        OUT / fixtures.DIALOGUES,
        [
            {
                "id": d["id"],
                "domain": d["domain"],
                "turns": [
                    {"index": i, "role": role, "text": text}
                    for i, (role, text) in enumerate(d["turns"], start=1)
                ],
            }
            for d in (DIALOGUE_A, DIALOGUE_B)
        ],
    )

    write_jsonl(
        OUT / fixtures.GOLD,
        [
            {"dialogue_id": did, "turn_index": t, "label": label, "knowledge": knowledge}
            for did, rows in GOLD.items()
            for t, label, knowledge in rows
        ],
    )

    write_jsonl(
        OUT / fixtures.PREDICTIONS,
        [
            {"dialogue_id": did, "turn_index": t, "label": label, "knowledge": knowledge}
            for did, rows in PREDICTIONS.items()
            for t, label, _raw, knowledge in rows
        ],
    )

    # Replay cache: for every annotated turn, a classification response and
    # an extraction response keyed by the exact request the client would send.
    dialogues = {d.id: d for d in load_dialogues(OUT / fixtures.DIALOGUES)}
    cache_records = []
    for did, rows in PREDICTIONS.items():
        for t, label, raw_knowledge, _ in rows:
            history = dialogues[did].turns[:t]
            for messages, response in (
                (build_classification_prompt(history), f"Output label: {label}"),
                (build_extraction_prompt(history), f"Output JSON: {raw_knowledge}"),
            ):
                request = CompletionRequest(messages=tuple(messages))
                cache_records.append(
                    {
                        "hash": request_hash(request),
                        "request": request.wire_body(),
                        "response": response,
                    }
                )
    write_jsonl(OUT / fixtures.REPLAY_CACHE, cache_records)

    # Normative prompt bytes: system message plus the three example pairs.
    for name, system, examples in (
        (fixtures.CLASSIFICATION_PROMPT, CLASSIFICATION_SYSTEM, CLASSIFICATION_EXAMPLES),
        (fixtures.EXTRACTION_PROMPT, EXTRACTION_SYSTEM, EXTRACTION_EXAMPLES),
    ):
        messages = [{"role": "system", "content": system}]
        for user, assistant in examples:
            messages.append({"role": "user", "content": user})
            messages.append({"role": "assistant", "content": assistant})
        (OUT / name).write_text(
            json.dumps(messages, ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )

    print(f"fixtures written to {OUT}")


if __name__ == "__main__":
    main()
