# Languages, interpreters, translator and checking harness
