"""Labeled text templates for simulated posts, replies and bot questions.

Slots: {where} renders as "" or " in <places>", {places} as a bare place
list, {mag} as the event magnitude. Labels are fixed per template so the
simulator's ground truth is exact.
"""

DEFAULT_KEYWORDS = ("earthquake", "quake", "tremor", "seism")

# witness posts, keyed by damage label
WITNESS = {
    "present": [
        "felt a strong quake{where}, things fell and the walls cracked",
        "my house is damaged after the earthquake{where}",
        "buildings collapsed, people hurt, earthquake here{where}",
        "I was home when the earthquake hit{where}, our ceiling came down",
        "the tremor broke all our windows{where}, my neighbour is injured",
        "we just had a huge earthquake{where}, the old church wall fell on the road",
        "my car got hit by falling bricks during the quake{where}",
        "earthquake{where}!! the shop next to me collapsed, people trapped",
    ],
    "absent_reported": [
        "felt the earthquake{where} but we are all fine, no damage here",
        "quake shook us{where}, nothing broken thankfully",
        "I felt that earthquake{where}, no damage at my place, everyone ok",
        "strong tremor{where} but my house is fine, no cracks",
        "we felt the quake{where}, all safe and nothing damaged",
        "earthquake{where} just now, my family is safe and the building is fine",
    ],
    "no_info": [
        "I felt it! So scary!! earthquake{where}",
        "whoa did anyone else feel that earthquake{where}",
        "my bed was shaking, was that an earthquake{where}?",
        "I am shaking, that quake{where} was long",
        "just felt a tremor{where}, my dog is freaking out",
        "we all ran outside, earthquake{where}!",
        "omg I felt the earthquake{where}, still scared",
        "my whole room moved, quake{where} I think",
    ],
}

# second-hand reports from users outside the felt area
NEWS = {
    "present": [
        "breaking: strong quake{where}, reports of collapsed buildings",
        "magnitude {mag} earthquake{where}, several people injured according to local media",
        "earthquake{where} destroys homes, rescue teams on the way",
        "news says the earthquake{where} damaged roads and a bridge",
        "death toll rises after the earthquake{where}",
    ],
    "absent_reported": [
        "no reports of damage after the quake{where}, officials say",
        "magnitude {mag} earthquake{where}, no injuries or damage reported",
        "authorities report no damage from the tremor{where}",
    ],
    "no_info": [
        "magnitude {mag} earthquake{where}, USGS reports",
        "praying for everyone affected by the earthquake{where}",
        "tsunami warning issued after earthquake{where}",
        "hope everyone is safe after that earthquake{where}",
        "USGS: magnitude {mag} quake recorded{where}",
        "thoughts with the people near the earthquake{where}",
        "earthquake alert{where}, stay away from damaged buildings",
        "live updates on the earthquake{where}",
    ],
}

# keyword matches that are not about the event
OFFTOPIC = [
    "earthquake sale at the store{where}, everything must go",
    "this new track is a total earthquake, on repeat all day",
    "quake champions tournament tonight{where}, who is in",
    "too much coffee, got a tremor in my hands lol",
    "that goal was an earthquake for the fans",
    "watching the earthquake movie again, so cheesy",
    "my stomach made a tremor, need lunch",
    "earthquake cake recipe: chocolate and cream cheese",
    "political earthquake as the party loses the vote{where}",
    "quake speedrun world record just dropped",
    "the bass at this concert{where} was like an earthquake",
    "new earthquake themed escape room opened{where}",
]

# no tracked keyword at all
CHATTER = [
    "good morning everyone{where}",
    "coffee time, then work",
    "traffic is terrible today{where}",
    "anyone watching the game tonight",
    "new blog post is up, link in bio",
    "lunch was great{where}",
    "cannot sleep again",
    "happy birthday to my best friend",
]

REPLY_DAMAGE = {
    "present": [
        "yes, some cracks in the walls and broken windows{where}",
        "the roof collapsed at my place, people hurt{where}",
        "yes, damage to several houses on my street{where}",
        "our building has cracks and the stairs are damaged",
    ],
    "absent_reported": [
        "no damage here, everyone is fine",
        "all good, nothing broken{where}",
        "no damage at all, just scared",
        "no injuries and no damage around me{where}",
    ],
    "no_info": [
        "who are you?",
        "stop spamming me",
        "lol",
        "why do you ask",
    ],
}

REPLY_GEO = {
    "collaborative": [
        "I'm in {places}",
        "I felt it at {places}",
        "near {places}, it was strong",
        "I was at {places} when it started",
        "at home in {places}",
    ],
    "uncollaborative": [
        "why do you want to know",
        "not telling",
        "sorry, prefer not to say",
        "leave me alone",
    ],
}

QUESTIONS = {
    "ask_damage": "Hi @{user}, we saw your post about the earthquake. Did you notice any damage to people or buildings near you?",
    "ask_geo": "Hi @{user}, we are mapping the earthquake. Where were you when you felt it?",
}

FILLER_WORDS = ("really", "so", "just", "like", "ok", "hmm", "wow", "the", "and", "pls", "tbh", "idk")


def render_places(names):
    if not names:
        return ""
    if len(names) == 1:
        return names[0]
    return ", ".join(names[:-1]) + " and " + names[-1]


def garble(skeleton, rng, noise, protected=DEFAULT_KEYWORDS):
    """Randomly drop, duplicate-letter, swap or replace words.

    Slot markers and protected keywords are left intact.
    """
    if noise <= 0:
        return skeleton
    words = skeleton.split(" ")
    out = []
    i = 0
    while i < len(words):
        w = words[i]
        core = w.strip(".,!?:").lower()
        if "{" in w or core in protected or rng.random() >= noise:
            out.append(w)
            i += 1
            continue
        op = rng.randrange(4)
        if op == 0:
            pass  # drop
        elif op == 1 and len(w) > 2:
            k = rng.randrange(len(w))
            out.append(w[:k] + w[k] + w[k:])
        elif op == 2 and i + 1 < len(words) and "{" not in words[i + 1]:
            out.extend([words[i + 1], w])
            i += 1
        else:
            out.append(rng.choice(FILLER_WORDS))
        i += 1
    return " ".join(out)


def all_skeletons():
    for bank in (WITNESS, NEWS, REPLY_DAMAGE, REPLY_GEO):
        for texts in bank.values():
            yield from texts
    yield from OFFTOPIC
    yield from CHATTER
    yield from QUESTIONS.values()
