#pragma once

#include <string>
#include <vector>

#include "tokleak/vocab.hpp"

namespace tokleak {

// Small general-purpose English word list used as the default session
// vocabulary for simulations and tests. Real tokenizer vocabularies can be
// substituted via load_vocabulary().
inline const std::vector<std::string>& basic_word_list() {
    static const std::vector<std::string> words = {
        // pronouns, articles, conjunctions, prepositions
        "a", "an", "the", "I", "you", "he", "she", "it", "we", "they",
        "me", "him", "her", "us", "them", "my", "your", "his", "its", "our",
        "their", "this", "these", "those", "and", "or", "but", "so", "if",
        "of", "in", "on", "at", "by", "to", "from", "with", "without",
        "for", "as", "into", "over", "under", "between", "through", "about",
        "after", "before", "while", "when", "where", "which", "who", "whom",
        "what", "why", "how", "than", "then", "there", "here", "not",
        "no", "that",
        // verbs
        "is", "are", "was", "were", "be", "been", "being", "am",
        "do", "does", "did", "done", "have", "has", "had", "having",
        "can", "could", "will", "would", "shall", "should", "may", "might",
        "must", "need", "needs", "needed", "try", "tries", "tried",
        "apply", "applies", "applying", "applied", "use", "uses", "used",
        "using", "make", "makes", "made", "making", "take", "takes", "took",
        "get", "gets", "got", "give", "gives", "gave", "go", "goes", "went",
        "come", "comes", "came", "see", "sees", "saw", "seen", "look",
        "looks", "looked", "looking", "hear", "hears", "heard", "hearing",
        "know", "knows", "knew", "known", "think", "thinks", "thought",
        "say", "says", "said", "tell", "tells", "told", "ask", "asks",
        "asked", "help", "helps", "helped", "work", "works", "worked",
        "find", "finds", "found", "keep", "keeps", "kept", "let", "lets",
        "start", "starts", "started", "stop", "stops", "stopped", "consider",
        "include", "includes", "including", "provide", "provides", "provided",
        "reduce", "reduces", "reduced", "improve", "improves", "improved",
        "ensure", "ensures", "avoid", "avoids", "avoided", "visit", "visits",
        "recommend", "suggest", "suggests", "contact", "follow", "follows",
        "check", "checks", "checked", "wash", "drink", "eat", "sleep",
        "rest", "practice", "exercise", "manage", "treat", "treats",
        // nouns
        "time", "day", "week", "month", "year", "people", "person", "way",
        "thing", "things", "man", "woman", "child", "children", "world",
        "life", "hand", "part", "place", "case", "point", "number", "fact",
        "water", "food", "health", "doctor", "nurse", "skin", "rash",
        "cream", "lotion", "medicine", "symptom", "symptoms", "area",
        "question", "questions", "answer", "answers", "detail", "details",
        "advice", "information", "example", "examples", "problem",
        "problems", "result", "results", "reason", "reasons", "idea",
        "ideas", "list", "item", "items", "step", "steps", "option",
        "options", "topic", "topics", "model", "models", "language",
        "word", "words", "sentence", "sentences", "response", "responses",
        "message", "messages", "service", "services", "stress", "mind",
        "body", "heart", "city", "country", "home", "house", "school",
        "park", "garden", "music", "book", "books", "story", "stories",
        "weather", "energy", "market", "money", "business", "company",
        "travel", "trip", "road", "plan", "plans", "goal", "goals",
        // adjectives and adverbs
        "good", "bad", "great", "small", "large", "big", "long", "short",
        "high", "low", "new", "old", "young", "early", "late", "important",
        "common", "simple", "easy", "hard", "possible", "likely", "local",
        "public", "private", "free", "full", "open", "clear", "clean",
        "dry", "warm", "cold", "hot", "gentle", "mild", "severe", "itchy",
        "red", "sore", "healthy", "daily", "often", "always", "never",
        "sometimes", "usually", "very", "too", "also", "only", "just",
        "well", "better", "best", "more", "most", "less", "least", "much",
        "many", "few", "some", "any", "all", "both", "each", "every",
        "other", "another", "same", "different", "several", "certain", "like",
        "sure", "sorry", "please", "thanks", "yes", "oh", "okay",
        // capitalised sentence starters seen in assistant prose
        "Oh", "No", "Yes", "Try", "Sure", "Here", "Certainly", "However",
        "Please", "Remember", "First", "Second", "Third", "Finally", "If",
        "It", "The", "This", "These", "There", "They", "You", "We", "He",
        "She", "A", "An", "In", "On", "For", "To", "When", "Where", "What",
        "Why", "How", "Also", "As", "Some", "Many", "Most", "After",
        "Before", "Drink", "Keep", "Apply", "Avoid", "Wash", "Consider",
        "Visit", "Contact", "Use", "Make", "Take", "Start", "Follow",
    };
    return words;
}

inline const Vocabulary& basic_english_vocab() {
    static const Vocabulary v = Vocabulary::from_words(basic_word_list(), "basic-english");
    return v;
}

}  // namespace tokleak
