/**
 * Guarded wrappers around the platform speech facilities. Both degrade to
 * no-ops when the APIs are missing, so the UI stays fully usable by touch.
 */

interface UtteranceLike {
  text: string;
  rate: number;
  onend: (() => void) | null;
}

interface SynthesisLike {
  cancel(): void;
  speak(utterance: UtteranceLike): void;
}

interface RecognitionLike {
  lang: string;
  interimResults: boolean;
  maxAlternatives: number;
  onresult: ((event: any) => void) | null;
  onerror: ((event: { error: string }) => void) | null;
  onend: (() => void) | null;
  start(): void;
  stop(): void;
}

export interface Speaker {
  readonly available: boolean;
  rate: number;
  speak(segments: readonly string[]): void;
  cancel(): void;
}

export interface Recognizer {
  readonly available: boolean;
  start(onText: (text: string) => void, onError: (reason: string) => void): void;
  stop(): void;
}

function defaultHost(): any {
  return typeof window !== "undefined" ? window : undefined;
}

export function createSpeaker(host: any = defaultHost()): Speaker {
  const synth: SynthesisLike | undefined = host && host.speechSynthesis;
  const Utterance = host && host.SpeechSynthesisUtterance;
  if (!synth || !Utterance) {
    return {
      available: false,
      rate: 1,
      speak() {},
      cancel() {},
    };
  }
  return {
    available: true,
    rate: 1,
    speak(segments) {
      synth.cancel();
      for (const text of segments) {
        if (!text) continue;
        const utterance: UtteranceLike = new Utterance(text);
        utterance.rate = this.rate;
        synth.speak(utterance);
      }
    },
    cancel() {
      synth.cancel();
    },
  };
}

export function createRecognizer(host: any = defaultHost()): Recognizer {
  const Ctor = host && (host.SpeechRecognition || host.webkitSpeechRecognition);
  if (!Ctor) {
    return {
      available: false,
      start(_onText, onError) {
        onError("speech recognition is not available on this device");
      },
      stop() {},
    };
  }
  let active: RecognitionLike | null = null;
  return {
    available: true,
    start(onText, onError) {
      if (active) active.stop();
      const recognition: RecognitionLike = new Ctor();
      recognition.lang = "en-US";
      recognition.interimResults = false;
      recognition.maxAlternatives = 1;
      recognition.onresult = (event: any) => {
        const result = event.results && event.results[0] && event.results[0][0];
        if (result && typeof result.transcript === "string") {
          onText(result.transcript);
        }
      };
      recognition.onerror = (event) => onError(event.error || "recognition error");
      recognition.onend = () => {
        if (active === recognition) active = null;
      };
      active = recognition;
      recognition.start();
    },
    stop() {
      if (active) active.stop();
      active = null;
    },
  };
}
