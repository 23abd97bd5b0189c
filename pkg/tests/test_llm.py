import json

import pytest

from convground import (
    CacheMissError,
    CacheMode,
    CompletionRequest,
    GroundingLabel,
    ResponseCache,
    Role,
    Turn,
    canonicalize,
    complete,
    fixtures,
    knowledge_equivalent,
    parse_knowledge_json,
    parse_label,
    rule_based_label,
)
from convground.llm import ApiError, TransportError, request_hash
from convground.prompts import (
    EXTRACTION_EXAMPLES,
    ChatMessage,
    MessageRole,
    build_classification_prompt,
)


def make_request(text="hello"):
    return CompletionRequest(
        messages=(ChatMessage(MessageRole.USER, text),)
    )


class TestParseLabel:
    @pytest.mark.parametrize(
        "raw, expected",
        [
            ("Output label: explicit", GroundingLabel.EXPLICIT),
            ("Output label: implicit", GroundingLabel.IMPLICIT),
            ("Output label: clarification", GroundingLabel.CLARIFICATION),
            ("IMPLICIT", GroundingLabel.IMPLICIT),
            ("the label is clarification.", GroundingLabel.CLARIFICATION),
            ("  Explicit\n", GroundingLabel.EXPLICIT),
        ],
    )
    def test_variants(self, raw, expected):
        assert parse_label(raw) is expected

    def test_no_label_raises_with_raw_text(self):
        with pytest.raises(ValueError, match="no idea"):
            parse_label("no idea")

    def test_partial_words_not_matched(self):
        with pytest.raises(ValueError):
            parse_label("explicitly inexplicit clarifications")


class TestParseKnowledgeJson:
    def test_single_quoted_with_prefix(self):
        k = parse_knowledge_json("Output JSON: {'row_count': 98}")
        assert k.row_count == 98

    def test_empty_object(self):
        assert parse_knowledge_json("{}").is_empty

    def test_column_info_single_quoted(self):
        k = parse_knowledge_json(
            "{'column_info': [{'column_name': 'height', 'max_value': 310}]}"
        )
        assert k.column_info[0].max_value == 310

    @pytest.mark.parametrize("_, raw", [(i, raw) for i, (_, raw) in enumerate(EXTRACTION_EXAMPLES)])
    def test_accepts_all_shipped_assistant_examples(self, _, raw):
        parse_knowledge_json(raw)

    def test_accepts_all_fixture_prediction_objects(self):
        records = [
            json.loads(line)
            for line in fixtures.path(fixtures.REPLAY_CACHE)
            .read_text(encoding="utf-8")
            .splitlines()
        ]
        extraction_responses = [
            r["response"] for r in records if r["response"].startswith("Output JSON:")
        ]
        assert len(extraction_responses) == 11
        for response in extraction_responses:
            parse_knowledge_json(response)

    def test_comma_separated_column_objects(self):
        k = parse_knowledge_json(
            "{'column_name': 'year', 'min_value': 1921, 'max_value': 2007}, "
            "{'column_name': 'area', 'min_value': 48, 'max_value': 3940}"
        )
        assert len(k.column_info) == 2

    def test_code_fences_stripped(self):
        k = parse_knowledge_json('```json\n{"row_count": 98}\n```')
        assert k.row_count == 98

    def test_null_fields_dropped(self):
        k = parse_knowledge_json(
            "{'row_count': 191, 'column_info': [{'column_name': "
            "'human development index', 'description': null}]}"
        )
        assert k.row_count == 191
        assert k.column_info[0].description is None

    def test_garbage_raises_with_offset(self):
        with pytest.raises(ValueError, match="offset"):
            parse_knowledge_json("{'row_count': ")

    def test_double_quoted_json_also_accepted(self):
        k = parse_knowledge_json('{"table_domain": "media"}')
        assert k.table_domain == "media"


class TestCache:
    def test_record_then_replay_round_trip(self, tmp_path):
        cache = ResponseCache(tmp_path / "cache.jsonl")
        request = make_request()
        cache.put(request_hash(request), request, "Output label: explicit")

        result = complete(request, CacheMode.REPLAY, cache=cache)
        assert result.text == "Output label: explicit"
        assert result.cached is True

        reloaded = ResponseCache(tmp_path / "cache.jsonl")
        assert reloaded.get(request_hash(request)) == "Output label: explicit"

    def test_replay_miss_names_hash(self, tmp_path):
        cache = ResponseCache(tmp_path / "cache.jsonl")
        request = make_request()
        with pytest.raises(CacheMissError) as excinfo:
            complete(request, CacheMode.REPLAY, cache=cache)
        assert excinfo.value.request_hash == request_hash(request)

    def test_hash_stable_across_message_objects(self):
        assert request_hash(make_request()) == request_hash(make_request())
        assert request_hash(make_request()) != request_hash(make_request("other"))

    def test_fixture_cache_replays_dialogue_a_turn_4(self, dialogues_by_id):
        cache = ResponseCache(fixtures.path(fixtures.REPLAY_CACHE))
        history = dialogues_by_id["A"].turns[:4]
        request = CompletionRequest(messages=tuple(build_classification_prompt(history)))
        result = complete(request, CacheMode.REPLAY, cache=cache)
        assert result.text == "Output label: implicit"


class _FakeResponse:
    def __init__(self, status_code, payload=None, text=""):
        self.status_code = status_code
        self._payload = payload
        self.text = text

    def json(self):
        return self._payload


class TestLiveTransport:
    def test_record_persists_response(self, tmp_path, monkeypatch):
        calls = []

        def fake_post(url, json=None, headers=None, timeout=None):
            calls.append((url, json))
            return _FakeResponse(
                200, {"choices": [{"message": {"content": "Output label: explicit"}}]}
            )

        monkeypatch.setattr("convground.llm.requests.post", fake_post)
        cache = ResponseCache(tmp_path / "cache.jsonl")
        request = make_request()
        result = complete(
            request, CacheMode.RECORD, cache=cache, endpoint="http://example.test/v1"
        )
        assert result.text == "Output label: explicit"
        assert result.cached is False
        assert calls[0][0] == "http://example.test/v1/chat/completions"
        assert calls[0][1]["temperature"] == 0
        # Replay now succeeds offline.
        replay = complete(request, CacheMode.REPLAY, cache=cache)
        assert replay.text == result.text
        assert replay.cached is True

    def test_non_success_status_raises_api_error(self, monkeypatch):
        monkeypatch.setattr(
            "convground.llm.requests.post",
            lambda *a, **kw: _FakeResponse(429, text="rate limited"),
        )
        with pytest.raises(ApiError, match="429"):
            complete(make_request(), CacheMode.LIVE, endpoint="http://example.test")

    def test_transport_failure_retries_then_raises(self, monkeypatch):
        import requests as requests_module

        attempts = []

        def failing_post(*args, **kwargs):
            attempts.append(1)
            raise requests_module.ConnectionError("refused")

        sleeps = []
        monkeypatch.setattr("convground.llm.requests.post", failing_post)
        with pytest.raises(TransportError):
            complete(
                make_request(),
                CacheMode.LIVE,
                endpoint="http://example.test",
                sleep=sleeps.append,
            )
        assert len(attempts) == 3
        assert sleeps == [0.5, 1.0]


class TestRuleBasedLabel:
    def test_acknowledgment_is_explicit(self):
        history = [
            Turn(1, Role.PROVIDER, "Attributes: year, title, author, short text description, category"),
            Turn(2, Role.SEEKER, "ok got it"),
        ]
        assert rule_based_label(history) is GroundingLabel.EXPLICIT

    def test_question_without_overlap_is_implicit(self):
        history = [
            Turn(1, Role.PROVIDER, "Hi, yes sure."),
            Turn(2, Role.SEEKER, "How many rows are there in the dataset?"),
        ]
        assert rule_based_label(history) is GroundingLabel.IMPLICIT

    def test_question_with_content_overlap_is_clarification(self):
        history = [
            Turn(1, Role.PROVIDER, "There is a column for the human development index."),
            Turn(2, Role.SEEKER, "But what does this index represent?"),
        ]
        assert rule_based_label(history) is GroundingLabel.CLARIFICATION

    def test_fallback_is_implicit(self):
        history = [Turn(1, Role.SEEKER, "no worries")]
        assert rule_based_label(history) is GroundingLabel.IMPLICIT

    def test_acknowledgment_with_question_is_not_explicit(self):
        history = [
            Turn(1, Role.PROVIDER, "The dataset has 98 rows."),
            Turn(2, Role.SEEKER, "thanks, but how many columns does the dataset have?"),
        ]
        assert rule_based_label(history) is not GroundingLabel.EXPLICIT
