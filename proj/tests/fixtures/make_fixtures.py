#!/usr/bin/env python3
"""Regenerates the JSON fixtures in this directory.

Run from anywhere: python3 tests/fixtures/make_fixtures.py
"""
import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent


def node_line(node):
    return "  " + json.dumps(node, ensure_ascii=False)


def write_script(path, nodes, prefix=""):
    body = "[\n" + ",\n".join(node_line(n) for n in nodes) + "\n]\n"
    path.write_text(prefix + body)


def sp(character, text, vol=-15):
    return {"audio_type": "speech", "layout": "foreground",
            "character": character, "vol": vol, "text": text}


def fg(kind, length, desc, vol=-25):
    return {"audio_type": kind, "layout": "foreground", "vol": vol,
            "len": length, "desc": desc}


def bg_begin(kind, ident, desc, vol=-30):
    return {"audio_type": kind, "layout": "background", "id": ident,
            "action": "begin", "vol": vol, "desc": desc}


def bg_end(kind, ident):
    return {"audio_type": kind, "layout": "background", "id": ident,
            "action": "end"}


LISTING = [
    bg_begin("music", 1, "Dramatic orchestral news theme"),
    sp("News Anchor", "Welcome to Mars News ..."),
    bg_end("music", 1),
    fg("sound_effect", 1, "Transition swoosh", vol=-35),
    sp("Reporter", "We're here at the ..."),
]
OUTRO = fg("music", 5, "orchestral news outro music", vol=-30)
SIGNOFF = sp("News Anchor",
             "... Stay tuned to Mars News for the latest updates.")

LISTING1 = LISTING + [OUTRO]
LISTING1_FULL = LISTING + [SIGNOFF, OUTRO]

DOG_BG = [bg_begin("sound_effect", 1, "a dog barking in the distance",
                   vol=-35)]


def listing_with_dog():
    nodes = list(LISTING1)
    # Bark under the reporter segment.
    return nodes[:4] + DOG_BG + [nodes[4], bg_end("sound_effect", 1)] + \
        nodes[5:]


# name -> (raw text, expected error code)
MALFORMED = {
    "speech_background": (
        [bg_begin("music", 1, "theme"),
         {"audio_type": "speech", "layout": "background", "character": "A",
          "vol": -15, "text": "whispering"},
         sp("B", "hello there"), bg_end("music", 1)],
        "SpeechNotForeground"),
    "end_without_begin": (
        [sp("A", "hello"), bg_end("music", 2)], "UnbalancedBackground"),
    "empty_span": (
        [sp("A", "hello"), bg_begin("music", 1, "theme"), bg_end("music", 1),
         sp("A", "bye")],
        "EmptyBackgroundSpan"),
    "missing_layout": (
        [sp("A", "hello"),
         {"audio_type": "music", "vol": -20, "len": 3, "desc": "outro"}],
        "MissingField"),
    "undefined_audio_type": (
        [sp("A", "hello"),
         {"audio_type": "narration", "layout": "foreground", "vol": -15,
          "text": "Once upon a time"}],
        "UnknownAudioType"),
    "json_mixed_with_prose": (
        '[\n  {"audio_type": "speech", "layout": "foreground", '
        '"character": "A", "vol": -15, "text": "Hello"},\n'
        '  then the music fades in softly while the crowd cheers\n]\n',
        "MalformedJson"),
    "music_missing_len": (
        [sp("A", "hello"),
         {"audio_type": "music", "layout": "foreground", "vol": -20,
          "desc": "outro"}],
        "MissingLen"),
    "zero_len": (
        [sp("A", "hello"), fg("sound_effect", 0, "door slam")],
        "NonPositiveLen"),
    "vol_too_loud": (
        [sp("A", "hello", vol=6)], "VolOutOfRange"),
    "top_level_object": (
        '{"audio_type": "speech", "layout": "foreground", "character": "A", '
        '"vol": -15, "text": "hello"}\n',
        "NotAList"),
}


CHARACTERS = ["Narrator", "Alice", "Bob", "Captain", "Detective", "Child",
              "Grandma", "Host"]
SFX = ["footsteps on gravel", "a door creaking open", "thunder rumbling",
       "rain on a tin roof", "crowd applause", "a clock ticking",
       "waves crashing", "birds chirping"]
MUSIC = ["gentle piano melody", "tense string ostinato", "upbeat jazz combo",
         "ambient synth pad", "playful marimba tune", "epic brass fanfare"]
WORDS = ("the night was quiet until a sudden knock echoed through the old "
         "house and everyone held their breath waiting for what came next "
         "as the wind howled outside").split()

GENRES = ["radio drama", "podcast", "news broadcast", "audiobook excerpt",
          "documentary narration", "comedy sketch", "sports commentary"]
TOPICS = ["a lighthouse keeper", "a lost robot", "a bakery contest",
          "a storm at sea", "a haunted library", "a chess final",
          "a jungle expedition", "a midnight train"]


def random_valid_script(rng):
    chars = rng.sample(CHARACTERS, rng.randint(1, 3))
    fg_count = rng.randint(2, 6)
    fgs = []
    for _ in range(fg_count):
        r = rng.random()
        if r < 0.6:
            words = " ".join(rng.sample(WORDS, rng.randint(4, 10)))
            fgs.append(sp(rng.choice(chars), words.capitalize() + "."))
        elif r < 0.8:
            fgs.append(fg("sound_effect", rng.choice([1, 2, 3]),
                          rng.choice(SFX)))
        else:
            fgs.append(fg("music", rng.choice([2, 4, 5]), rng.choice(MUSIC),
                          vol=-30))
    nodes = []
    span_begin = rng.randrange(fg_count)
    span_end = rng.randint(span_begin + 1, fg_count)
    kind = rng.choice(["music", "sound_effect"])
    desc = rng.choice(MUSIC if kind == "music" else SFX)
    for i, node in enumerate(fgs):
        if i == span_begin:
            nodes.append(bg_begin(kind, 1, desc, vol=-35))
        nodes.append(node)
        if i + 1 == span_end:
            nodes.append(bg_end(kind, 1))
    return nodes


def csr_fixture():
    rng = random.Random(2023)
    instructions = []
    for genre in GENRES:
        for topic in TOPICS:
            instructions.append(f"Write a short {genre} about {topic}.")
    instructions = instructions[:50]
    # Three single-shot failures, one per failure mode.
    invalid_at = {7: "prose", 23: "undefined_type", 41: "speech_background"}
    replay = {}
    for i, instruction in enumerate(instructions):
        failure = invalid_at.get(i)
        if failure == "prose":
            replay[instruction] = MALFORMED["json_mixed_with_prose"][0]
            continue
        if failure:
            nodes = MALFORMED[{"undefined_type": "undefined_audio_type",
                               "speech_background": "speech_background"}
                              [failure]][0]
            replay[instruction] = json.dumps(nodes, indent=2)
            continue
        text = json.dumps(random_valid_script(rng), indent=2)
        if i % 5 == 0:
            text = "Here is the audio script you asked for:\n" + text + \
                "\nLet me know if you want changes."
        elif i % 5 == 1:
            text = "```json\n" + text + "\n```"
        replay[instruction] = text
    return instructions, replay


def main():
    write_script(HERE / "listing1.json", LISTING1)
    write_script(HERE / "listing1_full.json", LISTING1_FULL)
    write_script(HERE / "listing1_llm_output.txt", LISTING1,
                 prefix="AudioScript = ")

    expected = {}
    for name, (content, code) in MALFORMED.items():
        path = HERE / "malformed" / f"{name}.json"
        if isinstance(content, str):
            path.write_text(content)
        else:
            write_script(path, content)
        expected[f"{name}.json"] = code
    (HERE / "malformed_expected.json").write_text(
        json.dumps(expected, indent=2) + "\n")

    write_script(HERE / "valid" / "single_sfx.json",
                 [fg("sound_effect", 2, "a glass shattering")])
    write_script(HERE / "valid" / "dog_bark.json", listing_with_dog())
    write_script(HERE / "valid" / "overlapping_backgrounds.json", [
        bg_begin("music", 1, "soft piano"),
        sp("Narrator", "It was a calm evening by the lake."),
        bg_begin("sound_effect", 1, "crickets chirping", vol=-40),
        sp("Narrator", "Then the fireflies came out."),
        bg_end("music", 1),
        fg("sound_effect", 2, "a splash"),
        bg_end("sound_effect", 1),
        fg("music", 3, "gentle outro", vol=-30),
    ])

    instructions, replay = csr_fixture()
    (HERE / "csr_instructions.json").write_text(
        json.dumps(instructions, indent=2) + "\n")
    (HERE / "csr_replay.json").write_text(json.dumps(replay, indent=2) + "\n")

    listing_text = (HERE / "listing1_llm_output.txt").read_text()
    (HERE / "write_replay.json").write_text(json.dumps({
        "A news broadcast from Mars": listing_text,
        "A bedtime story that never works": MALFORMED["json_mixed_with_prose"][0],
    }, indent=2) + "\n")

    speech_bg = [dict(n) for n in LISTING1]
    speech_bg[4] = dict(speech_bg[4], layout="background")
    (HERE / "chat_replay.json").write_text(json.dumps({
        "add a dog barking background": json.dumps(listing_with_dog(),
                                                   indent=2),
        "make the reporter speak in the background":
            json.dumps(speech_bg, indent=2),
    }, indent=2) + "\n")


def write_wav_fixtures():
    """Independent WAV fixtures written with the stdlib encoder."""
    import math
    import struct
    import wave

    out = HERE / "wav"
    out.mkdir(exist_ok=True)

    def tone(rate, seconds, freqs, amp):
        n = int(rate * seconds)
        return [amp * sum(math.sin(2 * math.pi * f * i / rate) for f in freqs)
                for i in range(n)]

    def save(name, rate, channels):
        frames = channels_data[name]
        with wave.open(str(out / name), "wb") as w:
            w.setnchannels(channels)
            w.setsampwidth(2)
            w.setframerate(rate)
            w.writeframes(b"".join(
                struct.pack("<h", max(-32768, min(32767, round(s * 32767))))
                for s in frames))

    speech = tone(24000, 1.2, [220.0], 0.3)
    left = tone(44100, 2.0, [330.0], 0.2)
    right = tone(44100, 2.0, [550.0], 0.2)
    stereo = [v for pair in zip(left, right) for v in pair]
    sfx = tone(16000, 0.8, [1000.0, 1500.0], 0.15)
    channels_data = {"speech_24k_mono.wav": speech,
                     "music_44k1_stereo.wav": stereo,
                     "sfx_16k_mono.wav": sfx}
    save("speech_24k_mono.wav", 24000, 1)
    save("music_44k1_stereo.wav", 44100, 2)
    save("sfx_16k_mono.wav", 16000, 1)


if __name__ == "__main__":
    main()
    write_wav_fixtures()
