#!/usr/bin/env python3
"""Writes data/sample_corpus.jsonl, a tiny hand-written corpus in the
line-delimited conversation format."""
import json
import pathlib

S, L = "Speaker", "Listener"

CONVERSATIONS = [
    ("c01", "joyful", "I got a puppy for my birthday.",
     [(S, "My family got me a new dog today!", "😀"), (L, "That is wonderful, I am so happy for you!", "😊"),
      (S, "He is so fun, we play all day.", None), (L, "Puppies are great fun, enjoy every day with him.", "🥳")]),
    ("c02", "joyful", "We went on a trip to the beach.",
     [(S, "We had a great trip last week.", None), (L, "Glad to hear it, sounds like a lot of fun!", "😊")]),
    ("c03", "sad", "My grandmother passed away last month.",
     [(S, "I lost my grandmother last month.", "😢"), (L, "I am so sorry for your loss.", "😢"),
      (S, "I still miss her every day.", None), (L, "It is okay to cry, grief takes time.", "😭")]),
    ("c04", "sad", "My best friend moved to another country.",
     [(S, "My best friend moved away and I am so sad.", None), (L, "Oh no, I am sorry. You must miss her.", "😞"),
      (S, "Yes, I really do.", None)]),
    ("c05", "angry", "Someone scratched my car in the parking lot.",
     [(S, "Someone scratched my new car and just left!", "😡"), (L, "That is so unfair, I would be furious too.", "😠")]),
    ("c06", "angry", "My boss blamed me for his mistake.",
     [(S, "My boss blamed me for his own mistake at work.", None), (L, "That would make me so mad. Did you tell him?", "😤"),
      (S, "Not yet, I am still annoyed.", None), (L, "You have every right to be frustrated.", "😠")]),
    ("c07", "afraid", "I heard strange noises in the house at night.",
     [(S, "I heard something in the dark house last night.", "😨"), (L, "That sounds scary! Were you alone?", "😱")]),
    ("c08", "afraid", "I watched a horror movie alone.",
     [(S, "I watched a horror movie alone and now I am terrified.", None), (L, "Oh no, scary movies give me fear for days.", "👻"),
      (S, "I think I will sleep with the light on.", None)]),
    ("c09", "surprised", "My friends threw me a party I did not expect.",
     [(S, "Wow, my friends threw me a surprise party!", "😮"), (L, "Omg, that is amazing! Were you surprised?", "🤩"),
      (S, "I could not believe it.", None), (L, "What an unexpected and wonderful shock!", "😲")]),
    ("c10", "surprised", "I found money in an old coat.",
     [(S, "I found money in my old coat today.", None), (L, "Whoa, that is a nice surprise!", "😮")]),
    ("c11", "disgusted", "I found something rotten in the fridge.",
     [(S, "There was rotten food in the fridge at work.", "🤢"), (L, "Yuck, that is gross. Did it smell?", "🤮"),
      (S, "It smelled awful.", None), (L, "That sounds disgusting, I am sorry you had to clean it.", "😖")]),
    ("c12", "disgusted", "My roommate never cleans the dishes.",
     [(S, "My roommate left dirty dishes for a week.", None), (L, "That is nasty, you should talk to him.", "🤢")]),
    ("c13", "anxious", "I have a job interview tomorrow.",
     [(S, "I have a job interview tomorrow and I am so nervous.", "😰"), (L, "It is normal to be anxious, you will do well.", "😬")]),
    ("c14", "anxious", "My exam is next week and I am not ready.",
     [(S, "My exam is next week and I am worried.", None), (L, "Try not to stress, make a plan and study a bit each day.", "😰"),
      (S, "The deadline is so close.", None), (L, "Take a deep breath, worry will not help you.", "😬")]),
    ("c15", "proud", "My daughter graduated from college.",
     [(S, "My daughter graduated from college today!", "🏆"), (L, "Congratulations, you must be so proud!", "🥇")]),
    ("c16", "proud", "I got a promotion at work.",
     [(S, "I finally earned a promotion at work.", None), (L, "That is a great achievement, you worked hard for it.", "💪"),
      (S, "Thank you, it feels like a big success.", None), (L, "You should be proud of what you accomplished.", "🏆")]),
    ("c17", "grateful", "A neighbor helped me fix my car.",
     [(S, "My neighbor helped me fix my car for free.", "🙏"), (L, "That is so kind of him, you must be grateful.", "🤗")]),
    ("c18", "grateful", "My friends sent me a gift when I was sick.",
     [(S, "My friends sent me a gift when I was sick.", None), (L, "What generous friends, that is a blessing.", "❤️"),
      (S, "I really appreciate them.", None)]),
    ("c19", "lonely", "I moved to a new city where I know nobody.",
     [(S, "I moved to a new city and I feel so lonely.", "😔"), (L, "That must be hard, being alone in a new place.", "🥺"),
      (S, "Nobody calls me here.", None), (L, "Maybe you could join a club and meet new friends.", None)]),
    ("c20", "lonely", "My family was away for the holidays.",
     [(S, "My family was away and the house was so empty.", None), (L, "I am sorry, the holidays can feel lonely.", "😔")]),
    ("c21", "joyful", "I passed my driving test.",
     [(S, "I passed my driving test this morning!", "😀"), (L, "That is great news, I am so glad for you!", "😀"),
      (S, "I am so happy.", None)]),
    ("c22", "sad", "My dog is very sick.",
     [(S, "My old dog is very sick.", "😢"), (L, "I am so sorry, that is so sad.", "😞")]),
    ("c23", "grateful", "A stranger returned my lost phone.",
     [(S, "A stranger found my lost phone and called me.", None), (L, "How kind! There are good people out there.", "🙏"),
      (S, "I was so thankful.", None), (L, "You should be, that was really generous of them.", "🤗")]),
    ("c24", "anxious", "I am waiting for medical test results.",
     [(S, "I am waiting for my test results and I feel tense.", "😬"), (L, "Waiting is the worst, I hope the news is good.", "😰")]),
]


def main():
    out = pathlib.Path(__file__).resolve().parents[1] / "data" / "sample_corpus.jsonl"
    with out.open("w") as f:
        for cid, emotion, context, turns in CONVERSATIONS:
            utts = []
            for speaker, text, emoji in turns:
                u = {"speaker": speaker, "text": text}
                if emoji:
                    u["emoji"] = emoji
                utts.append(u)
            rec = {"id": cid, "emotion": emotion, "context": context, "utterances": utts}
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")
    print(f"wrote {len(CONVERSATIONS)} conversations")


if __name__ == "__main__":
    main()
