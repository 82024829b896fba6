/* Copyright 2026 The Offload Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Completion tokens: one-shot handles to a value or an error that is not
//  available yet, plus the combinators (then, when_all) used to build
//  execution graphs out of them.
//
// Continuations run inline on whichever thread completes the token. A thread
//  that completes tokens (a device dispatcher, a transport reader) must never
//  block in get() on a token that only it can complete.

#ifndef OFFLOAD_FUTURES_HPP
#define OFFLOAD_FUTURES_HPP

#include "offload/error.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace offload {

  // value type of tokens that only signal completion
  struct Unit {
    friend bool operator==(Unit, Unit) { return true; }
  };

  template <typename T> class Token;
  template <typename T> class Promise;

  namespace detail {

    template <typename T>
    class SharedState {
    public:
      SharedState() = default;
      SharedState(const SharedState&) = delete;
      SharedState& operator=(const SharedState&) = delete;

      bool try_set_value(T value)
      {
        return transition([&](Result& r) { r.template emplace<1>(std::move(value)); });
      }

      bool try_set_error(std::exception_ptr error)
      {
        return transition([&](Result& r) { r.template emplace<2>(std::move(error)); });
      }

      // f runs exactly once, after the transition; inline if already terminal
      void on_complete(std::function<void()> f)
      {
        {
          std::lock_guard<std::mutex> lock(mutex_);
          if(result_.index() == 0) {
            continuations_.push_back(std::move(f));
            return;
          }
        }
        f();
      }

      bool is_ready() const
      {
        std::lock_guard<std::mutex> lock(mutex_);
        return result_.index() != 0;
      }

      bool has_error() const
      {
        std::lock_guard<std::mutex> lock(mutex_);
        return result_.index() == 2;
      }

      void wait() const
      {
        std::unique_lock<std::mutex> lock(mutex_);
        ready_cv_.wait(lock, [&] { return result_.index() != 0; });
      }

      template <typename Rep, typename Period>
      bool wait_for(std::chrono::duration<Rep, Period> timeout) const
      {
        std::unique_lock<std::mutex> lock(mutex_);
        return ready_cv_.wait_for(lock, timeout, [&] { return result_.index() != 0; });
      }

      // Only valid once terminal: the result never changes afterwards.
      const T& value() const
      {
        wait();
        if(result_.index() == 2)
          std::rethrow_exception(std::get<2>(result_));
        return std::get<1>(result_);
      }

      std::exception_ptr error() const
      {
        wait();
        if(result_.index() == 2)
          return std::get<2>(result_);
        return nullptr;
      }

    private:
      using Result = std::variant<std::monostate, T, std::exception_ptr>;

      template <typename Assign>
      bool transition(Assign&& assign)
      {
        std::vector<std::function<void()>> pending;
        {
          std::lock_guard<std::mutex> lock(mutex_);
          if(result_.index() != 0)
            return false;
          assign(result_);
          pending.swap(continuations_);
        }
        ready_cv_.notify_all();
        for(auto& f : pending)
          f();
        return true;
      }

      mutable std::mutex mutex_;
      mutable std::condition_variable ready_cv_;
      Result result_;
      std::vector<std::function<void()>> continuations_;
    };

    template <typename T> struct is_token : std::false_type {};
    template <typename T> struct is_token<Token<T>> : std::true_type {};
    template <typename T> inline constexpr bool is_token_v = is_token<T>::value;

    // Token<W> produced by a continuation returning R: void -> Unit, Token<W> -> W
    template <typename R> struct continuation_value { using type = R; };
    template <> struct continuation_value<void> { using type = Unit; };
    template <typename W> struct continuation_value<Token<W>> { using type = W; };

    template <typename T, typename F>
    decltype(auto) invoke_with(F& f, const T& value)
    {
      if constexpr(std::is_invocable_v<F&, const T&>) {
        return std::invoke(f, value);
      } else {
        static_assert(std::is_same_v<T, Unit>, "continuation must accept the token's value");
        return std::invoke(f);
      }
    }

    template <typename T, typename F>
    using invoke_with_t = decltype(invoke_with<T>(std::declval<F&>(), std::declval<const T&>()));

    template <typename W>
    void forward_into(const Token<W>& source, std::shared_ptr<Promise<W>> target);

    // Completes target with the outcome of g(), unwrapping a returned token.
    template <typename W, typename G>
    void fulfill(std::shared_ptr<Promise<W>> target, G&& g)
    {
      using R = std::invoke_result_t<G>;
      try {
        if constexpr(std::is_void_v<R>) {
          g();
          target->set_value(Unit{});
        } else if constexpr(is_token_v<R>) {
          forward_into(g(), std::move(target));
        } else {
          target->set_value(g());
        }
      } catch(...) {
        target->try_set_error(std::current_exception());
      }
    }

  }; // namespace detail

  template <typename T>
  class Token {
  public:
    using value_type = T;

    // An empty token; only useful as an assignment target.
    Token() = default;

    bool valid() const noexcept { return static_cast<bool>(state_); }

    // true once the token holds a value or an error
    bool is_ready() const { return state_->is_ready(); }
    bool has_error() const { return state_->has_error(); }
    bool has_value() const { return state_->is_ready() && !state_->has_error(); }

    void wait() const { state_->wait(); }

    template <typename Rep, typename Period>
    bool wait_for(std::chrono::duration<Rep, Period> timeout) const
    {
      return state_->wait_for(timeout);
    }

    // Blocks the calling task until the token is terminal, then returns the
    //  value or rethrows the stored error.
    T get() const { return state_->value(); }

    // Like get(), without the copy. The reference lives as long as any token
    //  sharing this state.
    const T& get_ref() const { return state_->value(); }

    std::exception_ptr error() const { return state_->error(); }

    // Low-level hook: f runs once the token is terminal.
    void on_complete(std::function<void()> f) const { state_->on_complete(std::move(f)); }

  private:
    template <typename U> friend class Promise;

    explicit Token(std::shared_ptr<detail::SharedState<T>> state)
      : state_(std::move(state))
    {}

    std::shared_ptr<detail::SharedState<T>> state_;
  };

  template <typename T>
  class Promise {
  public:
    Promise()
      : state_(std::make_shared<detail::SharedState<T>>())
    {}

    Promise(const Promise&) = delete;
    Promise& operator=(const Promise&) = delete;
    Promise(Promise&& other) noexcept = default;

    Promise& operator=(Promise&& other) noexcept
    {
      if(this != &other) {
        abandon();
        state_ = std::move(other.state_);
      }
      return *this;
    }

    ~Promise() { abandon(); }

    Token<T> get_token() const { return Token<T>(state_); }

    void set_value(T value)
    {
      if(!state_->try_set_value(std::move(value)))
        throw Error(Errc::promise_already_satisfied, "promise fulfilled twice");
    }

    void set_value()
      requires std::is_same_v<T, Unit>
    {
      set_value(Unit{});
    }

    void set_error(std::exception_ptr error)
    {
      if(!state_->try_set_error(std::move(error)))
        throw Error(Errc::promise_already_satisfied, "promise fulfilled twice");
    }

    template <typename E>
    void set_error(E error)
    {
      set_error(std::make_exception_ptr(std::move(error)));
    }

    bool try_set_value(T value) { return state_->try_set_value(std::move(value)); }
    bool try_set_error(std::exception_ptr error) { return state_->try_set_error(std::move(error)); }

  private:
    void abandon()
    {
      if(state_)
        state_->try_set_error(std::make_exception_ptr(
            Error(Errc::broken_promise, "promise destroyed without a result")));
    }

    std::shared_ptr<detail::SharedState<T>> state_;
  };

  template <typename T>
  Token<std::decay_t<T>> make_ready(T&& value)
  {
    Promise<std::decay_t<T>> p;
    p.set_value(std::forward<T>(value));
    return p.get_token();
  }

  inline Token<Unit> make_ready() { return make_ready(Unit{}); }

  template <typename T>
  Token<T> make_failed(std::exception_ptr error)
  {
    Promise<T> p;
    p.set_error(std::move(error));
    return p.get_token();
  }

  template <typename T>
  Token<T> make_failed(const Error& error)
  {
    return make_failed<T>(std::make_exception_ptr(error));
  }

  template <typename T>
  T get(const Token<T>& token)
  {
    return token.get();
  }

  namespace detail {

    template <typename W>
    void forward_into(const Token<W>& source, std::shared_ptr<Promise<W>> target)
    {
      source.on_complete([source, target = std::move(target)] {
        if(auto e = source.error())
          target->try_set_error(e);
        else
          target->try_set_value(source.get_ref());
      });
    }

  }; // namespace detail

  template <typename T, typename F>
  using then_result_t =
      Token<typename detail::continuation_value<detail::invoke_with_t<T, std::decay_t<F>>>::type>;

  // Runs f(value) inline on the completing thread once token is ready. An
  //  error in token propagates without calling f; an exception thrown by f
  //  fails the result. A continuation that returns a token is unwrapped.
  template <typename T, typename F>
  then_result_t<T, F> then(const Token<T>& token, F&& f)
  {
    using W = typename then_result_t<T, F>::value_type;
    auto target = std::make_shared<Promise<W>>();
    auto result = target->get_token();
    token.on_complete([token, target, f = std::forward<F>(f)]() mutable {
      if(auto e = token.error()) {
        target->try_set_error(e);
        return;
      }
      detail::fulfill(target, [&]() -> decltype(auto) { return detail::invoke_with<T>(f, token.get_ref()); });
    });
    return result;
  }

  // Same as then(), but f is rescheduled onto executor (anything with a
  //  post(std::function<void()>) member) instead of running inline.
  template <typename T, typename Executor, typename F>
  then_result_t<T, F> then(const Token<T>& token, Executor& executor, F&& f)
  {
    using W = typename then_result_t<T, F>::value_type;
    auto target = std::make_shared<Promise<W>>();
    auto result = target->get_token();
    token.on_complete([token, target, &executor, f = std::forward<F>(f)]() mutable {
      executor.post([token, target, f = std::move(f)]() mutable {
        if(auto e = token.error()) {
          target->try_set_error(e);
          return;
        }
        detail::fulfill(target, [&]() -> decltype(auto) { return detail::invoke_with<T>(f, token.get_ref()); });
      });
    });
    return result;
  }

  namespace detail {

    struct JoinState {
      explicit JoinState(std::size_t count)
        : remaining(count)
      {}

      void arrive(std::exception_ptr error)
      {
        if(error) {
          std::lock_guard<std::mutex> lock(mutex);
          if(!first_error)
            first_error = std::move(error);
        }
        if(remaining.fetch_sub(1, std::memory_order_acq_rel) == 1) {
          std::exception_ptr e;
          {
            std::lock_guard<std::mutex> lock(mutex);
            e = first_error;
          }
          if(e)
            promise.try_set_error(e);
          else
            promise.try_set_value(Unit{});
        }
      }

      std::atomic<std::size_t> remaining;
      std::mutex mutex;
      std::exception_ptr first_error;
      Promise<Unit> promise;
    };

  }; // namespace detail

  // Ready once every input is terminal. If any input failed, the result fails
  //  with the error that arrived first; the remaining inputs are not cancelled.
  template <typename T>
  Token<Unit> when_all(std::span<const Token<T>> tokens)
  {
    if(tokens.empty())
      return make_ready();
    auto join = std::make_shared<detail::JoinState>(tokens.size());
    auto result = join->promise.get_token();
    for(const auto& t : tokens)
      t.on_complete([t, join] { join->arrive(t.error()); });
    return result;
  }

  template <typename T>
  Token<Unit> when_all(const std::vector<Token<T>>& tokens)
  {
    return when_all(std::span<const Token<T>>(tokens));
  }

  template <typename... Ts>
  Token<Unit> when_all(const Token<Ts>&... tokens)
    requires(sizeof...(Ts) > 0)
  {
    auto join = std::make_shared<detail::JoinState>(sizeof...(Ts));
    auto result = join->promise.get_token();
    (tokens.on_complete([t = tokens, join] { join->arrive(t.error()); }), ...);
    return result;
  }

  // hpx::wait_all analog: blocks until every token is terminal and rethrows
  //  the first error, if any.
  template <typename T>
  void wait_all(const std::vector<Token<T>>& tokens)
  {
    when_all(tokens).get();
  }

}; // namespace offload

#endif
