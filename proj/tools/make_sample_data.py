#!/usr/bin/env python3
"""Writes the synthetic sample corpus under data/.

Everything is derived from fixed seeds, so re-running reproduces the
checked-in files byte for byte.
"""
import argparse
import json
import random
from pathlib import Path

CANVAS = (360, 640)

CATEGORIES = {
    "Shopping": (["cart", "deals", "checkout", "wishlist", "orders"], ["Add to cart", "Buy now", "Free shipping", "Your orders"]),
    "Travel": (["flights", "hotels", "trips", "boarding pass", "map"], ["Book a flight", "Check in", "Explore Paris", "My trips"]),
    "Food & Drink": (["menu", "recipes", "delivery", "restaurants", "reservations"], ["Order now", "Today's specials", "Reserve a table", "Fresh pasta"]),
    "Health & Fitness": (["workout", "steps", "sleep", "heart rate", "meals"], ["Start workout", "10,000 steps", "Sleep score", "Daily goal"]),
    "Finance": (["balance", "transfers", "cards", "budget", "statements"], ["Send money", "Account balance", "Pay bills", "Monthly budget"]),
    "Social": (["feed", "messages", "friends", "profile", "stories"], ["Follow", "New message", "Share post", "Friend requests"]),
    "Music & Audio": (["playlists", "podcasts", "player", "albums", "radio"], ["Play", "Now playing", "Top hits", "Your library"]),
    "Education": (["courses", "lessons", "quizzes", "progress", "flashcards"], ["Continue lesson", "Take quiz", "Course overview", "Your streak"]),
    "Weather": (["forecast", "radar", "alerts", "hourly", "locations"], ["Today", "7-day forecast", "Severe weather", "Feels like 21°"]),
    "Productivity": (["tasks", "notes", "calendar", "reminders", "projects"], ["Add task", "Due today", "New note", "Upcoming events"]),
    "News": (["headlines", "topics", "saved articles", "live", "local"], ["Breaking news", "Read more", "Top stories", "For you"]),
    "Photography": (["gallery", "camera", "albums", "filters", "editor"], ["Take photo", "Recent", "Apply filter", "Shared albums"]),
}

PALETTES = [
    ("#ffffff", "#1e88e5"), ("#fafafa", "#e53935"), ("#121212", "#bb86fc"), ("#f5f5f5", "#43a047"),
    ("#fff8e1", "#ff8f00"), ("#e3f2fd", "#0d47a1"), ("#263238", "#4dd0e1"), ("#fce4ec", "#ad1457"),
    ("#ffffff", "#6200ee"), ("#eceff1", "#37474f"), ("#f1f8e9", "#558b2f"), ("#1a237e", "#ffca28"),
]

TYPES = ["Text", "TextButton", "Icon", "Image", "BackgroundImage", "Toolbar", "ListItem", "Input", "Card",
         "WebView", "Checkbox", "RadioButton", "Slider"]
TYPE_WEIGHTS = [24, 12, 14, 10, 2, 6, 10, 5, 6, 1, 3, 3, 2]

ICON_BASE = [
    "alarm", "bookmark", "add shopping cart", "home", "search", "settings", "favorite", "share", "delete",
    "edit", "menu", "close", "check", "arrow back", "arrow forward", "refresh", "notifications", "person",
    "account circle", "lock", "visibility", "camera", "photo", "music note", "play arrow", "pause", "stop",
    "skip next", "skip previous", "volume up", "mic", "call", "chat", "email", "send", "attach file",
    "cloud", "download", "upload", "folder", "calendar today", "schedule", "map", "place", "directions",
    "flight", "hotel", "restaurant", "local cafe", "shopping bag", "credit card", "wallet", "star", "thumb up",
    "help", "info", "warning", "error", "language", "wifi", "bluetooth", "battery full", "brightness",
    "filter", "sort", "list", "grid view", "more vert", "logout", "login", "fitness center", "directions run",
]
ICON_MODIFIERS = ["", "outline", "filled", "round", "sharp", "two tone", "circle", "badge", "off", "add",
                  "remove", "alert", "small"]


def pick_type(rng):
    return rng.choices(TYPES, weights=TYPE_WEIGHTS)[0]


def random_layout(rng, lo=3, hi=12):
    w, h = CANVAS
    n = rng.randint(lo, hi)
    comps = []
    y = rng.randint(0, 24)
    for _ in range(n):
        t = pick_type(rng)
        if t in ("Icon", "Checkbox", "RadioButton"):
            cw = ch = rng.choice([24, 32, 40, 48])
        elif t in ("Image", "Card"):
            cw, ch = rng.randint(120, w - 16), rng.randint(80, 220)
        elif t == "BackgroundImage":
            cw, ch = w, rng.randint(160, 320)
        elif t == "Toolbar":
            cw, ch = w, 56
        else:
            cw, ch = rng.randint(60, w - 16), rng.choice([24, 32, 40, 48, 56])
        if y + ch > h:
            y = rng.randint(0, h - ch)
        x = 0 if cw == w else rng.randint(0, w - cw)
        comps.append({"type": t, "bbox": [x, y, cw, ch]})
        y += ch + rng.randint(4, 24)
    return {"width": w, "height": h}, comps


def knowledge_records(count, seed):
    rng = random.Random(seed)
    cats = sorted(CATEGORIES)
    out = []
    for i in range(count):
        cat = rng.choice(cats)
        features, phrases = CATEGORIES[cat]
        bg, primary = rng.choice(PALETTES)
        canvas, comps = random_layout(rng)
        for c in comps:
            if c["type"] in ("Text", "TextButton"):
                c["text"] = rng.choice(phrases)
            elif c["type"] == "Icon":
                c["text"] = rng.choice(ICON_BASE)
        feature = rng.choice(features)
        out.append({
            "id": f"ui-{i:05d}",
            "canvas": canvas,
            "components": comps,
            "ui_description": f"{rng.choice(['screen showing', 'page for', 'view of', 'display of'])} {feature} in a {cat.lower()} app",
            "theme_attrs": {
                "theme_color": bg,
                "primary_color": primary,
                "theme_description": f"A {rng.choice(['clean', 'bold', 'minimal', 'playful', 'calm'])} {cat.lower()} screen about {feature}",
                "app_category": cat,
            },
        })
    return out


def icon_svg(rng):
    shapes = []
    for _ in range(rng.randint(1, 3)):
        if rng.random() < 0.5:
            x, y = rng.randint(2, 12), rng.randint(2, 12)
            shapes.append(f'<rect x="{x}" y="{y}" width="{rng.randint(4, 22 - x)}" height="{rng.randint(4, 22 - y)}" rx="1"/>')
        else:
            shapes.append(f'<circle cx="{rng.randint(6, 18)}" cy="{rng.randint(6, 18)}" r="{rng.randint(2, 6)}"/>')
    return '<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 24 24">' + "".join(shapes) + "</svg>"


def icon_records(seed):
    rng = random.Random(seed)
    out = []
    for base in ICON_BASE:
        for mod in ICON_MODIFIERS:
            phrase = f"{base} {mod}".strip()
            out.append({"id": phrase.replace(" ", "_"), "phrase": phrase, "svg": icon_svg(rng)})
    return out


def sample_inputs(count, seed):
    rng = random.Random(seed)
    prompts = [
        "A shopping app home page with featured deals and a cart button",
        "A travel booking screen for flights to Tokyo",
        "A fitness tracker dashboard showing today's steps",
        "A recipe detail page for homemade pasta",
        "A banking app overview with balance and recent transfers",
        "A music player screen with album art and playback controls",
        "A weather forecast page with hourly temperatures",
        "A language learning lesson screen with a quiz",
        "A social feed with stories and a compose button",
        "A news reader front page with top headlines",
        "A photo gallery with shared albums",
        "A task manager showing today's to-dos",
    ]
    out = []
    for i in range(count):
        canvas, comps = random_layout(rng, 3, 8)
        out.append({"prompt": prompts[i % len(prompts)], "layout": {"canvas": canvas, "components": comps}})
    return out


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False, separators=(",", ":")) + "\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    parser.add_argument("--records", type=int, default=3738)
    args = parser.parse_args()
    out = args.out
    (out / "samples").mkdir(parents=True, exist_ok=True)
    write_jsonl(out / "knowledge.jsonl", knowledge_records(args.records, 20240801))
    write_jsonl(out / "icons.jsonl", icon_records(904))
    for i, item in enumerate(sample_inputs(12, 7)):
        (out / "samples" / f"input_{i:02d}.json").write_text(json.dumps(item, indent=2) + "\n")
    (out / "vqa_templates.json").write_text(json.dumps({"templates": [
        {"attribute": "theme_color", "question": "Question: What is the background color of this screenshot? Answer:"},
        {"attribute": "primary_color", "question": "Question: Besides the background, what's the dominant color in this image? Answer:"},
        {"attribute": "theme_description", "question": "Question: Can you describe this screenshot in detail? Answer:"},
        {"attribute": "app_category", "question": "Question: Which category does this app belong to? Answer:"},
    ]}, indent=2) + "\n")
    flags = ["no_retrieval", "no_theme_description", "no_theme_image", "no_text_module", "no_image_module", "no_icon_module"]
    names = ["-retrieved knowledge", "-theme description", "-theme image", "-text module", "-image module", "-icon module"]
    configs = [{"name": "full", "flags": []}] + [{"name": n, "flags": [f]} for n, f in zip(names, flags)]
    (out / "ablation.json").write_text(json.dumps({"configs": configs}, indent=2) + "\n")


if __name__ == "__main__":
    main()
