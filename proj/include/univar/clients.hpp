#ifndef UNIVAR_CLIENTS_HPP
#define UNIVAR_CLIENTS_HPP

#include <functional>
#include <memory>
#include <mutex>
#include <string>

namespace univar {

// Text-generation client. Implementations backed by remote APIs read their
// credentials from the environment variable named in the run config
// (UNIVAR_<CLIENT>_KEY); none of that is needed for scripted doubles.
class TextGenClient {
 public:
  virtual ~TextGenClient() = default;

  // One prompt in, one text blob out. Throws ClientError on failure.
  virtual std::string complete(const std::string& prompt) = 0;

  // Whether complete() may be invoked from multiple threads at once.
  virtual bool concurrent_safe() const { return false; }
};

class TranslatorClient {
 public:
  virtual ~TranslatorClient() = default;

  // Translates text from src to tgt (ISO 639-3). Throws ClientError on failure.
  virtual std::string translate(const std::string& text, const std::string& src,
                                const std::string& tgt) = 0;

  virtual bool concurrent_safe() const { return false; }
};

// Wraps a client that is not safe for concurrent use behind a mutex.
class SerializingTextGenClient : public TextGenClient {
 public:
  explicit SerializingTextGenClient(std::shared_ptr<TextGenClient> inner)
      : inner_(std::move(inner)) {}

  std::string complete(const std::string& prompt) override {
    std::lock_guard<std::mutex> lock(mu_);
    return inner_->complete(prompt);
  }

  bool concurrent_safe() const override { return true; }

 private:
  std::shared_ptr<TextGenClient> inner_;
  std::mutex mu_;
};

class SerializingTranslatorClient : public TranslatorClient {
 public:
  explicit SerializingTranslatorClient(std::shared_ptr<TranslatorClient> inner)
      : inner_(std::move(inner)) {}

  std::string translate(const std::string& text, const std::string& src,
                        const std::string& tgt) override {
    std::lock_guard<std::mutex> lock(mu_);
    return inner_->translate(text, src, tgt);
  }

  bool concurrent_safe() const override { return true; }

 private:
  std::shared_ptr<TranslatorClient> inner_;
  std::mutex mu_;
};

// Passes text through unchanged; useful for English-only desk runs and tests.
class IdentityTranslator : public TranslatorClient {
 public:
  std::string translate(const std::string& text, const std::string&,
                        const std::string&) override {
    return text;
  }

  bool concurrent_safe() const override { return true; }
};

// Adapts a plain function; handy for scripted test doubles.
class LambdaTextGenClient : public TextGenClient {
 public:
  using Fn = std::function<std::string(const std::string&)>;

  explicit LambdaTextGenClient(Fn fn, bool safe = true)
      : fn_(std::move(fn)), safe_(safe) {}

  std::string complete(const std::string& prompt) override { return fn_(prompt); }
  bool concurrent_safe() const override { return safe_; }

 private:
  Fn fn_;
  bool safe_;
};

}  // namespace univar

#endif
