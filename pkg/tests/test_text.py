import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tweetspam.text import (
    TAGSET,
    pos_tag,
    preprocess,
    strip_for_sentiment,
    tokenize,
)


class TestPreprocess:
    def test_double_encoded_contraction(self):
        assert preprocess("I&amp;#39;m here").text == "I am here"

    def test_plain_text_identity(self):
        assert preprocess("plain text").text == "plain text"

    def test_malformed_entity_passes_through(self):
        # "&amp;t" decodes to "&t" which is not a standard entity
        assert preprocess("don&amp;t click &lt;here&gt;").text == "don&t click <here>"

    def test_contraction_case_handling(self):
        assert preprocess("Don't stop").text == "Do not stop"
        assert preprocess("DON'T STOP").text == "DO NOT STOP"
        assert preprocess("i'm fine").text == "i am fine"

    def test_possessive_left_intact(self):
        assert preprocess("John's car").text == "John's car"

    def test_whitespace_collapsed(self):
        assert preprocess("  a \t b\n\nc  ").text == "a b c"

    def test_original_length_recorded(self):
        assert preprocess("a  b").original_length == 4

    @settings(max_examples=200, deadline=None)
    @given(st.text(max_size=80))
    def test_idempotent(self, raw):
        once = preprocess(raw).text
        assert preprocess(once).text == once

    @pytest.mark.parametrize(
        "raw",
        ["&amp;amp;lt;", "I&#39;m &quot;ok&quot;", "5 &gt; 3 &amp;&amp; 2 &lt; 4"],
    )
    def test_idempotent_on_entity_heavy_text(self, raw):
        once = preprocess(raw).text
        assert preprocess(once).text == once


class TestTokenize:
    def test_mixed_tweet(self):
        tokens = tokenize(preprocess("Win FREE iPhone!! http://t.co/abc #luck @bob"))
        assert [(t.surface, t.kind) for t in tokens] == [
            ("Win", "word"),
            ("FREE", "word"),
            ("iPhone", "word"),
            ("!", "punctuation"),
            ("!", "punctuation"),
            ("http://t.co/abc", "url"),
            ("#luck", "hashtag"),
            ("@bob", "mention"),
        ]

    def test_empty_after_trimming(self):
        assert tokenize(preprocess("   ")) == []

    def test_emoticon_lexicon(self):
        tokens = tokenize(preprocess(":) ok"))
        assert [(t.surface, t.kind) for t in tokens] == [
            (":)", "emoticon"),
            ("ok", "word"),
        ]

    def test_numbers_and_www_urls(self):
        tokens = tokenize("save 50% at www.shop.example now")
        kinds = {t.surface: t.kind for t in tokens}
        assert kinds["50"] == "number"
        assert kinds["www.shop.example"] == "url"

    @settings(max_examples=200, deadline=None)
    @given(st.text(max_size=80))
    def test_spans_reconstruct_surfaces(self, raw):
        normalized = preprocess(raw)
        tokens = tokenize(normalized)
        previous_end = -1
        for token in tokens:
            assert len(token.surface) > 0
            assert normalized.text[token.start : token.end] == token.surface
            assert token.start >= previous_end  # non-overlapping, increasing
            assert token.end > token.start
            previous_end = token.end


class TestStripForSentiment:
    def test_drops_hashtag(self):
        tokens = tokenize("great #win")
        kept = strip_for_sentiment(tokens)
        assert [t.surface for t in kept] == ["great"]

    def test_identity_without_targets(self):
        tokens = tokenize("great stuff here")
        assert strip_for_sentiment(tokens) == tokens

    def test_all_removed(self):
        tokens = tokenize("@a http://x #y")
        assert strip_for_sentiment(tokens) == []


class TestPosTag:
    def test_kind_driven_url(self):
        tokens = tokenize("http://t.co/a")
        assert pos_tag(tokens).tags == ("U",)

    def test_suffix_fallback_ly(self):
        tokens = tokenize("quickly")
        # "quickly" is not in the shipped lexicon; the -ly rule fires
        assert pos_tag(tokens).tags == ("R",)

    def test_lexicon_lookup(self):
        tokens = tokenize("the dog runs")
        assert pos_tag(tokens).tags == ("D", "N", "V")

    def test_suffix_rules(self):
        assert pos_tag(tokenize("zorping")).tags == ("V",)
        assert pos_tag(tokenize("zorped")).tags == ("V",)
        assert pos_tag(tokenize("zorbs")).tags == ("N",)
        assert pos_tag(tokenize("zorb")).tags == ("N",)  # default

    def test_kind_tags_full_set(self):
        tokens = tokenize(":) 42 , #tag @user http://a.example")
        assert pos_tag(tokens).tags == ("E", "$", ",", "#", "@", "U")

    @settings(max_examples=150, deadline=None)
    @given(st.text(max_size=60))
    def test_alignment_and_tagset(self, raw):
        tokens = tokenize(preprocess(raw))
        seq = pos_tag(tokens)
        assert len(seq.tags) == len(tokens)
        assert all(tag in TAGSET for tag in seq.tags)
